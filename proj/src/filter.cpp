#include "specfilter/filter.hpp"

#include <cmath>
#include <stdexcept>

namespace specfilter {

std::string kernel_tag(KernelKind kind) {
  switch (kind) {
    case KernelKind::Identity: return "id";
    case KernelKind::Linear: return "lin";
    case KernelKind::SobolevCompact: return "sobc";
    case KernelKind::SobolevUnbounded: return "sobu";
    case KernelKind::GaussianRbf: return "rbf";
  }
  throw std::logic_error("unreachable kernel kind");
}

KernelKind parse_kernel(const std::string& tag) {
  if (tag == "id") return KernelKind::Identity;
  if (tag == "lin") return KernelKind::Linear;
  if (tag == "sobc") return KernelKind::SobolevCompact;
  if (tag == "sobu") return KernelKind::SobolevUnbounded;
  if (tag == "rbf") return KernelKind::GaussianRbf;
  throw std::runtime_error("unknown kernel '" + tag + "' (want id|lin|sobc|sobu|rbf)");
}

void KernelSpec::check() const {
  if (needs_gamma()) {
    if (!gamma) throw std::runtime_error("kernel " + kernel_tag(kind) + " requires --gamma");
    if (!(*gamma > 0.0)) throw std::runtime_error("kernel bandwidth gamma must be positive");
  } else if (gamma) {
    throw std::runtime_error("kernel " + kernel_tag(kind) + " takes no gamma");
  }
}

double kernel_eval(const KernelSpec& spec, double s, double t) {
  spec.check();
  switch (spec.kind) {
    case KernelKind::Identity:
      throw std::runtime_error("identity kernel is index-defined; use kernel_matrix");
    case KernelKind::Linear:
      return s * t;
    case KernelKind::SobolevCompact:
      return std::min(s, t);
    case KernelKind::SobolevUnbounded:
      return std::exp(-*spec.gamma * std::abs(s - t));
    case KernelKind::GaussianRbf: {
      double d = s - t;
      return std::exp(-*spec.gamma * d * d);
    }
  }
  throw std::logic_error("unreachable kernel kind");
}

KernelMatrix kernel_matrix(const KernelSpec& spec, const Eigen::VectorXd& values) {
  spec.check();
  const Eigen::Index r = values.size();
  KernelMatrix km;
  km.spec = spec;
  km.values_used = values;
  if (spec.kind == KernelKind::Identity) {
    km.K = Eigen::MatrixXd::Identity(r, r);
    return km;
  }
  km.K.resize(r, r);
  for (Eigen::Index i = 0; i < r; ++i) {
    for (Eigen::Index j = 0; j <= i; ++j) {
      double v = kernel_eval(spec, values[i], values[j]);
      km.K(i, j) = v;
      km.K(j, i) = v;
    }
  }
  return km;
}

Eigen::VectorXd filter_values(const KernelMatrix& km, const Eigen::VectorXd& alpha) {
  if (km.K.cols() != alpha.size()) {
    throw std::runtime_error("filter_values: alpha length does not match kernel rank");
  }
  return km.K * alpha;
}

Eigen::MatrixXd build_propagation(const SpectralSystem& sys, const KernelMatrix& km,
                                  const Eigen::VectorXd& alpha) {
  if (km.K.rows() != sys.r) {
    throw std::runtime_error("build_propagation: kernel rank does not match spectral rank");
  }
  Eigen::VectorXd h = filter_values(km, alpha);
  return sys.U * h.asDiagonal() * sys.right().transpose();
}

Eigen::MatrixXd regularize(const Eigen::MatrixXd& P, double beta) {
  if (P.rows() != P.cols()) throw std::runtime_error("regularize: matrix not square");
  Eigen::MatrixXd out = P;
  out.diagonal().array() += beta;
  return out;
}

}  // namespace specfilter
