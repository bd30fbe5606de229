#pragma once

#include <Eigen/Dense>
#include <optional>
#include <string>

#include "specfilter/spectral.hpp"

namespace specfilter {

enum class KernelKind { Identity, Linear, SobolevCompact, SobolevUnbounded, GaussianRbf };

// CLI tags: id | lin | sobc | sobu | rbf
std::string kernel_tag(KernelKind kind);
KernelKind parse_kernel(const std::string& tag);

struct KernelSpec {
  KernelKind kind = KernelKind::Identity;
  std::optional<double> gamma;  // bandwidth, required by sobu and rbf only

  bool needs_gamma() const {
    return kind == KernelKind::SobolevUnbounded || kind == KernelKind::GaussianRbf;
  }
  void check() const;  // throws when gamma is missing/extra/non-positive
};

struct KernelMatrix {
  Eigen::MatrixXd K;            // r x r, symmetric
  KernelSpec spec;
  Eigen::VectorXd values_used;  // the spectral values K was built on
};

// Pointwise kernel. The identity kernel is defined on indices, not values,
// and rejects value-level evaluation. The two exponential kernels use the
// decaying forms exp(-gamma |s-t|) and exp(-gamma |s-t|^2).
double kernel_eval(const KernelSpec& spec, double s, double t);

// Gram matrix over an (already truncated) spectral value vector. The identity
// kernel yields I_r regardless of the values.
KernelMatrix kernel_matrix(const KernelSpec& spec, const Eigen::VectorXd& values);

// K * alpha: the reshaped filter evaluated at each retained spectral value.
Eigen::VectorXd filter_values(const KernelMatrix& km, const Eigen::VectorXd& alpha);

// Materializes U diag(K alpha) V^T. The model's forward pass uses a factored
// evaluation instead; this dense form exists for operator inspection and as
// the oracle the factored path is tested against.
Eigen::MatrixXd build_propagation(const SpectralSystem& sys, const KernelMatrix& km,
                                  const Eigen::VectorXd& alpha);

// P + beta * I.
Eigen::MatrixXd regularize(const Eigen::MatrixXd& P, double beta);

}  // namespace specfilter
