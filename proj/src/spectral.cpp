#include "specfilter/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <numeric>
#include <stdexcept>
#include <vector>

#include "specfilter/numeric_io.hpp"

namespace specfilter {
namespace {

// Flip column signs so the largest-magnitude entry of each U column is
// nonnegative; the matching V column flips with it, leaving U diag(s) V^T
// unchanged.
void canonicalize_signs(Eigen::MatrixXd& U, Eigen::MatrixXd* V) {
  for (Eigen::Index j = 0; j < U.cols(); ++j) {
    Eigen::Index imax = 0;
    U.col(j).cwiseAbs().maxCoeff(&imax);
    if (U(imax, j) < 0.0) {
      U.col(j) = -U.col(j);
      if (V) V->col(j) = -V->col(j);
    }
  }
}

std::vector<Eigen::Index> magnitude_order(const Eigen::VectorXd& vals) {
  std::vector<Eigen::Index> idx(vals.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(), [&](Eigen::Index a, Eigen::Index b) {
    double ma = std::abs(vals[a]), mb = std::abs(vals[b]);
    if (ma != mb) return ma > mb;
    return vals[a] > vals[b];  // equal magnitude: positive first
  });
  return idx;
}

void write_u64(std::ostream& out, std::uint64_t v, std::uint64_t& hash) {
  unsigned char b[8];
  for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>(v >> (8 * i));
  out.write(reinterpret_cast<const char*>(b), 8);
  hash = fnv1a64(b, 8, hash);
}

std::uint64_t read_u64(std::istream& in, std::uint64_t& hash) {
  unsigned char b[8];
  in.read(reinterpret_cast<char*>(b), 8);
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(b[i]) << (8 * i);
  hash = fnv1a64(b, 8, hash);
  return v;
}

void write_matrix_rowmajor(std::ostream& out, const Eigen::MatrixXd& M, std::uint64_t& hash) {
  using RowMajor = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
  RowMajor tmp = M;
  static_assert(sizeof(double) == 8);
  const auto bytes = static_cast<std::size_t>(tmp.size()) * 8;
  out.write(reinterpret_cast<const char*>(tmp.data()), static_cast<std::streamsize>(bytes));
  hash = fnv1a64(tmp.data(), bytes, hash);
}

Eigen::MatrixXd read_matrix_rowmajor(std::istream& in, Eigen::Index rows, Eigen::Index cols,
                                     std::uint64_t& hash) {
  using RowMajor = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
  RowMajor tmp(rows, cols);
  const auto bytes = static_cast<std::size_t>(tmp.size()) * 8;
  in.read(reinterpret_cast<char*>(tmp.data()), static_cast<std::streamsize>(bytes));
  if (!in) throw std::runtime_error("spectral cache: truncated file");
  hash = fnv1a64(tmp.data(), bytes, hash);
  return Eigen::MatrixXd(tmp);
}

constexpr char kMagic[8] = {'S', 'P', 'E', 'C', 'S', 'Y', 'S', '1'};

}  // namespace

SpectralSystem decompose(const GraphMatrix& M) {
  if (M.values.rows() != M.values.cols()) throw std::runtime_error("decompose: matrix not square");
  if (!M.values.allFinite()) throw std::runtime_error("decompose: non-finite entries");
  const Eigen::Index n = M.values.rows();

  SpectralSystem sys;
  sys.n = n;
  sys.r = n;
  sys.symmetric = M.symmetric;
  sys.source_kind = M.kind;

  if (M.symmetric) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(M.values);
    if (es.info() != Eigen::Success) {
      throw std::runtime_error("decompose: eigensolver did not converge");
    }
    auto order = magnitude_order(es.eigenvalues());
    sys.values.resize(n);
    sys.U.resize(n, n);
    for (Eigen::Index k = 0; k < n; ++k) {
      sys.values[k] = es.eigenvalues()[order[k]];
      sys.U.col(k) = es.eigenvectors().col(order[k]);
    }
    canonicalize_signs(sys.U, nullptr);
  } else {
    Eigen::BDCSVD<Eigen::MatrixXd> svd(M.values, Eigen::ComputeThinU | Eigen::ComputeThinV);
    if (svd.info() != Eigen::Success) {
      throw std::runtime_error("decompose: SVD did not converge");
    }
    sys.values = svd.singularValues();  // already descending, nonnegative
    sys.U = svd.matrixU();
    sys.V = svd.matrixV();
    canonicalize_signs(sys.U, &sys.V);
  }
  return sys;
}

SpectralSystem truncate(const SpectralSystem& sys, double factor) {
  if (!(factor >= 0.0 && factor < 1.0)) {
    throw std::runtime_error("truncate: factor must lie in [0, 1)");
  }
  const Eigen::Index keep = sys.n - static_cast<Eigen::Index>(std::floor(factor * double(sys.n)));
  if (keep > sys.r) {
    throw std::runtime_error("truncate: factor below the truncation already applied");
  }
  SpectralSystem out;
  out.n = sys.n;
  out.r = keep;
  out.symmetric = sys.symmetric;
  out.source_kind = sys.source_kind;
  out.truncation = factor;
  out.values = sys.values.head(keep);
  out.U = sys.U.leftCols(keep);
  if (!sys.symmetric) out.V = sys.V.leftCols(keep);
  return out;
}

Eigen::MatrixXd reconstruct(const SpectralSystem& sys) {
  return sys.U * sys.values.asDiagonal() * sys.right().transpose();
}

void save_cache(const SpectralSystem& sys, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  out.write(kMagic, 8);

  std::uint64_t hash = fnv1a64(nullptr, 0);
  write_u64(out, static_cast<std::uint64_t>(sys.n), hash);
  write_u64(out, static_cast<std::uint64_t>(sys.r), hash);
  unsigned char flag = sys.symmetric ? 1 : 0;
  out.write(reinterpret_cast<const char*>(&flag), 1);
  hash = fnv1a64(&flag, 1, hash);

  write_matrix_rowmajor(out, sys.values, hash);
  write_matrix_rowmajor(out, sys.U, hash);
  write_matrix_rowmajor(out, sys.right(), hash);

  std::uint64_t ignore = fnv1a64(nullptr, 0);
  write_u64(out, hash, ignore);
  if (!out) throw std::runtime_error("spectral cache: write failed for " + path.string());
}

SpectralSystem load_cache(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  char magic[8];
  in.read(magic, 8);
  if (!in || std::memcmp(magic, kMagic, 8) != 0) {
    throw std::runtime_error("spectral cache: version mismatch in " + path.string());
  }

  std::uint64_t hash = fnv1a64(nullptr, 0);
  SpectralSystem sys;
  sys.n = static_cast<Eigen::Index>(read_u64(in, hash));
  sys.r = static_cast<Eigen::Index>(read_u64(in, hash));
  unsigned char flag = 0;
  in.read(reinterpret_cast<char*>(&flag), 1);
  if (!in || sys.n < 0 || sys.r < 0 || sys.r > sys.n) {
    throw std::runtime_error("spectral cache: corrupt header in " + path.string());
  }
  hash = fnv1a64(&flag, 1, hash);
  sys.symmetric = flag != 0;
  sys.truncation = sys.n > 0 ? double(sys.n - sys.r) / double(sys.n) : 0.0;

  Eigen::MatrixXd values = read_matrix_rowmajor(in, sys.r, 1, hash);
  sys.values = values.col(0);
  sys.U = read_matrix_rowmajor(in, sys.n, sys.r, hash);
  Eigen::MatrixXd V = read_matrix_rowmajor(in, sys.n, sys.r, hash);
  if (!sys.symmetric) sys.V = std::move(V);

  std::uint64_t tail_hash = fnv1a64(nullptr, 0);
  std::uint64_t stored = read_u64(in, tail_hash);
  if (!in || stored != hash) {
    throw std::runtime_error("spectral cache: checksum failure in " + path.string());
  }
  return sys;
}

}  // namespace specfilter
