#include "specfilter/representation.hpp"

#include <cmath>
#include <stdexcept>

namespace specfilter {

std::string repr_tag(ReprKind kind) {
  switch (kind) {
    case ReprKind::Adjacency: return "adj";
    case ReprKind::Laplacian: return "lap";
    case ReprKind::NormAdjacency: return "nadj";
    case ReprKind::NormLaplacian: return "nlap";
  }
  throw std::logic_error("unreachable repr kind");
}

ReprKind parse_repr(const std::string& tag) {
  if (tag == "adj") return ReprKind::Adjacency;
  if (tag == "lap") return ReprKind::Laplacian;
  if (tag == "nadj") return ReprKind::NormAdjacency;
  if (tag == "nlap") return ReprKind::NormLaplacian;
  throw std::runtime_error("unknown representation '" + tag + "' (want adj|lap|nadj|nlap)");
}

GraphMatrix build_representation(const Dataset& ds, ReprKind kind) {
  const int n = ds.n;
  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(n, n);
  for (const auto& [s, t] : ds.edges) {
    if (ds.directed) {
      A(t, s) = 1.0;
    } else {
      A(s, t) = 1.0;
      A(t, s) = 1.0;
    }
  }

  GraphMatrix out;
  out.symmetric = !ds.directed;
  out.kind = kind;

  if (kind == ReprKind::Adjacency) {
    out.values = std::move(A);
    return out;
  }

  Eigen::VectorXd deg = A.colwise().sum().transpose();

  if (kind == ReprKind::Laplacian) {
    out.values = -A;
    out.values.diagonal() += deg;
    return out;
  }

  Eigen::VectorXd dinv(n);
  for (int i = 0; i < n; ++i) dinv[i] = deg[i] > 0.0 ? 1.0 / std::sqrt(deg[i]) : 0.0;
  Eigen::MatrixXd NA = dinv.asDiagonal() * A * dinv.asDiagonal();

  if (kind == ReprKind::NormAdjacency) {
    out.values = std::move(NA);
  } else {  // NormLaplacian
    out.values = -NA;
    out.values.diagonal().array() += 1.0;
  }
  return out;
}

}  // namespace specfilter
