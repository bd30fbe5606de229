#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>

#include "specfilter/filter.hpp"
#include "specfilter/spectral.hpp"

namespace specfilter {

enum class ModelKind { Linear, PropLinear, Kernel, LrKernel, Mlp2 };

// CLI tags: linear | plin | kernel | lrkernel | mlp2
std::string model_tag(ModelKind kind);
ModelKind parse_model(const std::string& tag);

// Trainable state. Fields not used by a kind stay empty, which lets the
// optimizer walk every field uniformly. The same struct carries gradients.
struct ModelParams {
  Eigen::MatrixXd W;       // d x C linear head
  Eigen::VectorXd alpha;   // r spectral coefficients (kernel kinds)
  Eigen::MatrixXd W1, W2;  // mlp2 layers (d x h, h x C)
  Eigen::VectorXd b1, b2;  // mlp2 biases
};

// Constants of one forward computation. X is required; P for PropLinear;
// (sys, K) for the kernel kinds, with effective rank K->K.rows() <= sys->r
// selecting the leading spectral columns. beta adds the identity bypass to
// the kernel kinds.
struct ForwardContext {
  const Eigen::MatrixXd* X = nullptr;
  const Eigen::MatrixXd* P = nullptr;
  const SpectralSystem* sys = nullptr;
  const KernelMatrix* K = nullptr;
  double beta = 0.0;
};

// Thread-local record of the temporaries forward/backward allocate; the test
// suite uses it to check that the factored kernel path never materializes an
// n x n intermediate.
struct ForwardAllocStats {
  std::size_t max_temp_elements = 0;
  std::size_t temp_count = 0;
  void reset() { *this = {}; }
};
ForwardAllocStats& forward_alloc_stats();

// Logits, n x C. Kernel kinds evaluate U (diag(K alpha) (V^T (X W))) + beta X W
// without forming the n x n operator.
Eigen::MatrixXd forward(ModelKind kind, const ModelParams& params, const ForwardContext& ctx);

// Parameter gradients for upstream G = dLoss/dlogits.
ModelParams backward(ModelKind kind, const ModelParams& params, const ForwardContext& ctx,
                     const Eigen::MatrixXd& G);

// Weights i.i.d. uniform in [-1/sqrt(fan_in), 1/sqrt(fan_in)], biases zero.
// alpha starts at the retained spectral values (identity kernel) or at the
// ridge least-squares solution of K alpha ~ values, so training begins at the
// plain low-rank propagation point. km may be null for non-kernel kinds.
ModelParams init_params(ModelKind kind, int d, int C, int hidden, const KernelMatrix* km,
                        std::uint64_t seed);

// Scalar-output rearrangement of the kernel model: the j-th prediction as a
// Frobenius inner product of a measurement matrix with the rank-1 parameter
// alpha * beta^T. Verification identity only; requires C = 1.
double sensing_form(const SpectralSystem& sys, const KernelMatrix& km,
                    const Eigen::VectorXd& alpha, const Eigen::VectorXd& beta_vec,
                    const Eigen::MatrixXd& X, Eigen::Index j);

}  // namespace specfilter
