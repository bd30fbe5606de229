#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <utility>
#include <vector>

#include "specfilter/model.hpp"
#include "specfilter/splits.hpp"

namespace specfilter {

struct TrainConfig {
  double lr = 1e-2;
  double weight_decay = 0.0;
  int epochs = 1000;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_eps = 1e-8;
  std::uint64_t seed = 0;
};

struct AdamState {
  ModelParams m;  // first moments, shapes mirror the parameters
  ModelParams v;  // second moments
  long t = 0;
};

AdamState make_adam_state(const ModelParams& params);

struct RunResult {
  double test_accuracy = 0.0;
  double val_accuracy = 0.0;  // NaN when the split has no validation set
  int best_epoch = 0;
  std::vector<double> loss_trace;  // train loss after each update
};

// Thrown when the loss leaves the reals.
struct TrainingDiverged : std::runtime_error {
  int epoch;
  explicit TrainingDiverged(int e)
      : std::runtime_error("training diverged (non-finite loss) at epoch " + std::to_string(e)),
        epoch(e) {}
};

// Mean masked softmax cross-entropy and its logit gradient (zero outside the
// mask). Stabilized by row-max subtraction. Throws on an empty mask.
std::pair<double, Eigen::MatrixXd> cross_entropy(const Eigen::MatrixXd& logits,
                                                 const Eigen::VectorXi& labels,
                                                 const std::vector<int>& mask);

// One optimizer step. Weight decay enters the raw gradient before the moment
// updates; bias-corrected moments drive the parameter change.
void adam_step(AdamState& state, ModelParams& params, const ModelParams& grads,
               const TrainConfig& cfg);

// Fraction of masked nodes whose argmax matches; argmax ties resolve to the
// lowest class index. Throws on an empty mask.
double accuracy(const Eigen::MatrixXd& logits, const Eigen::VectorXi& labels,
                const std::vector<int>& mask);

// Full-batch training with best-validation checkpointing: runs cfg.epochs
// Adam steps, evaluates validation accuracy after each, and reports the test
// accuracy of the parameters at the best-validation epoch (ties -> earliest).
// Splits without a validation set fall back to the final epoch. Deterministic
// given cfg.seed.
RunResult train_run(ModelKind kind, const ForwardContext& ctx, const Eigen::VectorXi& labels,
                    int num_classes, const SplitSet& split, const TrainConfig& cfg,
                    int hidden = 0);

}  // namespace specfilter
