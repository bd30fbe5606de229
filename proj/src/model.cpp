#include "specfilter/model.hpp"

#include <cmath>
#include <stdexcept>

#include "specfilter/rng.hpp"

namespace specfilter {
namespace {

thread_local ForwardAllocStats g_alloc_stats;

void note_temp(Eigen::Index rows, Eigen::Index cols) {
  auto elems = static_cast<std::size_t>(rows) * static_cast<std::size_t>(cols);
  g_alloc_stats.temp_count += 1;
  g_alloc_stats.max_temp_elements = std::max(g_alloc_stats.max_temp_elements, elems);
}

Eigen::Index kernel_rank(const ForwardContext& ctx) {
  if (!ctx.sys || !ctx.K) throw std::runtime_error("kernel model: context lacks spectral system or kernel");
  Eigen::Index r = ctx.K->K.rows();
  if (r > ctx.sys->r) throw std::runtime_error("kernel model: kernel rank exceeds spectral rank");
  return r;
}

void check_shapes(ModelKind kind, const ModelParams& p, const ForwardContext& ctx) {
  if (!ctx.X) throw std::runtime_error("forward: context lacks features");
  const Eigen::Index d = ctx.X->cols();
  switch (kind) {
    case ModelKind::Linear:
      if (p.W.rows() != d) throw std::runtime_error("forward: W rows != feature dim");
      break;
    case ModelKind::PropLinear:
      if (!ctx.P) throw std::runtime_error("forward: PropLinear context lacks P");
      if (ctx.P->rows() != ctx.P->cols() || ctx.P->rows() != ctx.X->rows()) {
        throw std::runtime_error("forward: P shape mismatch");
      }
      if (p.W.rows() != d) throw std::runtime_error("forward: W rows != feature dim");
      break;
    case ModelKind::Kernel:
    case ModelKind::LrKernel: {
      Eigen::Index r = kernel_rank(ctx);
      if (p.alpha.size() != r) throw std::runtime_error("forward: alpha length != kernel rank");
      if (p.W.rows() != d) throw std::runtime_error("forward: W rows != feature dim");
      if (ctx.sys->U.rows() != ctx.X->rows()) throw std::runtime_error("forward: spectral n != node count");
      break;
    }
    case ModelKind::Mlp2:
      if (p.W1.rows() != d || p.W1.cols() != p.b1.size() || p.W2.rows() != p.W1.cols() ||
          p.W2.cols() != p.b2.size()) {
        throw std::runtime_error("forward: mlp2 shape mismatch");
      }
      break;
  }
}

}  // namespace

std::string model_tag(ModelKind kind) {
  switch (kind) {
    case ModelKind::Linear: return "linear";
    case ModelKind::PropLinear: return "plin";
    case ModelKind::Kernel: return "kernel";
    case ModelKind::LrKernel: return "lrkernel";
    case ModelKind::Mlp2: return "mlp2";
  }
  throw std::logic_error("unreachable model kind");
}

ModelKind parse_model(const std::string& tag) {
  if (tag == "linear") return ModelKind::Linear;
  if (tag == "plin") return ModelKind::PropLinear;
  if (tag == "kernel") return ModelKind::Kernel;
  if (tag == "lrkernel") return ModelKind::LrKernel;
  if (tag == "mlp2") return ModelKind::Mlp2;
  throw std::runtime_error("unknown model '" + tag + "' (want linear|plin|kernel|lrkernel|mlp2)");
}

ForwardAllocStats& forward_alloc_stats() { return g_alloc_stats; }

Eigen::MatrixXd forward(ModelKind kind, const ModelParams& params, const ForwardContext& ctx) {
  check_shapes(kind, params, ctx);
  const Eigen::MatrixXd& X = *ctx.X;
  const Eigen::Index n = X.rows();

  switch (kind) {
    case ModelKind::Linear:
      note_temp(n, params.W.cols());
      return X * params.W;

    case ModelKind::PropLinear: {
      Eigen::MatrixXd XW = X * params.W;
      note_temp(n, XW.cols());
      note_temp(n, XW.cols());
      return *ctx.P * XW;
    }

    case ModelKind::Kernel:
    case ModelKind::LrKernel: {
      const Eigen::Index r = kernel_rank(ctx);
      const Eigen::Index C = params.W.cols();
      Eigen::VectorXd h = filter_values(*ctx.K, params.alpha);
      note_temp(r, 1);
      Eigen::MatrixXd XW = X * params.W;
      note_temp(n, C);
      Eigen::MatrixXd T = ctx.sys->right().leftCols(r).transpose() * XW;
      note_temp(r, C);
      T.array().colwise() *= h.array();
      Eigen::MatrixXd out = ctx.sys->U.leftCols(r) * T;
      note_temp(n, C);
      if (ctx.beta != 0.0) out.noalias() += ctx.beta * XW;
      return out;
    }

    case ModelKind::Mlp2: {
      Eigen::MatrixXd Z = (X * params.W1).rowwise() + params.b1.transpose();
      note_temp(n, Z.cols());
      Z = Z.cwiseMax(0.0);
      Eigen::MatrixXd out = (Z * params.W2).rowwise() + params.b2.transpose();
      note_temp(n, out.cols());
      return out;
    }
  }
  throw std::logic_error("unreachable model kind");
}

ModelParams backward(ModelKind kind, const ModelParams& params, const ForwardContext& ctx,
                     const Eigen::MatrixXd& G) {
  check_shapes(kind, params, ctx);
  const Eigen::MatrixXd& X = *ctx.X;
  if (G.rows() != X.rows()) throw std::runtime_error("backward: G rows != node count");

  ModelParams g;
  switch (kind) {
    case ModelKind::Linear:
      g.W = X.transpose() * G;
      break;

    case ModelKind::PropLinear: {
      Eigen::MatrixXd PtG = ctx.P->transpose() * G;
      note_temp(PtG.rows(), PtG.cols());
      g.W = X.transpose() * PtG;
      break;
    }

    case ModelKind::Kernel:
    case ModelKind::LrKernel: {
      const Eigen::Index r = kernel_rank(ctx);
      if (G.cols() != params.W.cols()) throw std::runtime_error("backward: G cols != classes");
      auto U = ctx.sys->U.leftCols(r);
      auto V = ctx.sys->right().leftCols(r);

      Eigen::MatrixXd UtG = U.transpose() * G;  // r x C
      note_temp(r, G.cols());
      Eigen::MatrixXd XW = X * params.W;
      note_temp(XW.rows(), XW.cols());
      Eigen::MatrixXd VtXW = V.transpose() * XW;  // r x C
      note_temp(r, XW.cols());

      Eigen::VectorXd d = (UtG.array() * VtXW.array()).rowwise().sum();
      note_temp(r, 1);
      g.alpha = ctx.K->K.transpose() * d;

      Eigen::VectorXd h = filter_values(*ctx.K, params.alpha);
      note_temp(r, 1);
      Eigen::MatrixXd scaled = h.asDiagonal() * UtG;  // r x C
      note_temp(r, G.cols());
      Eigen::MatrixXd VS = V * scaled;  // n x C
      note_temp(VS.rows(), VS.cols());
      g.W = X.transpose() * VS;
      if (ctx.beta != 0.0) g.W.noalias() += ctx.beta * (X.transpose() * G);
      break;
    }

    case ModelKind::Mlp2: {
      Eigen::MatrixXd Z = (X * params.W1).rowwise() + params.b1.transpose();
      Eigen::MatrixXd H = Z.cwiseMax(0.0);
      g.W2 = H.transpose() * G;
      g.b2 = G.colwise().sum();
      Eigen::MatrixXd dH = G * params.W2.transpose();
      Eigen::MatrixXd dZ = (Z.array() > 0.0).select(dH, 0.0);
      g.W1 = X.transpose() * dZ;
      g.b1 = dZ.colwise().sum();
      break;
    }
  }
  return g;
}

ModelParams init_params(ModelKind kind, int d, int C, int hidden, const KernelMatrix* km,
                        std::uint64_t seed) {
  if (d <= 0 || C <= 0) throw std::runtime_error("init_params: non-positive shape");
  Rng rng(seed);
  auto fill_uniform = [&rng](Eigen::MatrixXd& M, double bound) {
    // storage (column-major) order, so draws are reproducible
    for (Eigen::Index k = 0; k < M.size(); ++k) M.data()[k] = uniform_sym(rng, bound);
  };

  ModelParams p;
  switch (kind) {
    case ModelKind::Linear:
    case ModelKind::PropLinear:
      p.W.resize(d, C);
      fill_uniform(p.W, 1.0 / std::sqrt(double(d)));
      break;

    case ModelKind::Kernel:
    case ModelKind::LrKernel: {
      if (!km) throw std::runtime_error("init_params: kernel kinds need a kernel matrix");
      p.W.resize(d, C);
      fill_uniform(p.W, 1.0 / std::sqrt(double(d)));
      const Eigen::VectorXd& vals = km->values_used;
      if (km->spec.kind == KernelKind::Identity) {
        p.alpha = vals;
      } else {
        // ridge least squares K alpha ~ values, so K alpha starts at (or near)
        // the retained spectrum
        Eigen::MatrixXd A = km->K.transpose() * km->K;
        A.diagonal().array() += 1e-6;
        p.alpha = A.ldlt().solve(km->K.transpose() * vals);
      }
      break;
    }

    case ModelKind::Mlp2: {
      if (hidden <= 0) throw std::runtime_error("init_params: mlp2 needs a positive hidden width");
      p.W1.resize(d, hidden);
      fill_uniform(p.W1, 1.0 / std::sqrt(double(d)));
      p.b1 = Eigen::VectorXd::Zero(hidden);
      p.W2.resize(hidden, C);
      fill_uniform(p.W2, 1.0 / std::sqrt(double(hidden)));
      p.b2 = Eigen::VectorXd::Zero(C);
      break;
    }
  }
  return p;
}

double sensing_form(const SpectralSystem& sys, const KernelMatrix& km,
                    const Eigen::VectorXd& alpha, const Eigen::VectorXd& beta_vec,
                    const Eigen::MatrixXd& X, Eigen::Index j) {
  const Eigen::Index r = km.K.rows();
  if (r > sys.r) throw std::runtime_error("sensing_form: kernel rank exceeds spectral rank");
  if (alpha.size() != r) throw std::runtime_error("sensing_form: alpha length mismatch");
  if (beta_vec.size() != X.cols()) throw std::runtime_error("sensing_form: beta length mismatch");
  if (j < 0 || j >= X.rows()) throw std::runtime_error("sensing_form: node index out of range");

  // measurement matrix M_j = sum_i ktilde_i^j xtilde_i^T with
  // ktilde_i^j = U(j,i) K e_i and xtilde_i = X^T v_i
  const Eigen::Index dd = X.cols();
  Eigen::MatrixXd M = Eigen::MatrixXd::Zero(r, dd);
  auto V = sys.right().leftCols(r);
  for (Eigen::Index i = 0; i < r; ++i) {
    Eigen::VectorXd ktilde = sys.U(j, i) * km.K.col(i);
    Eigen::VectorXd xtilde = X.transpose() * V.col(i);
    M.noalias() += ktilde * xtilde.transpose();
  }
  return (M.array() * (alpha * beta_vec.transpose()).array()).sum();
}

}  // namespace specfilter
