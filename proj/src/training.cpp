#include "specfilter/training.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace specfilter {

AdamState make_adam_state(const ModelParams& params) {
  AdamState st;
  st.m = params;
  st.v = params;
  for (auto* ps : {&st.m, &st.v}) {
    ps->W.setZero();
    ps->alpha.setZero();
    ps->W1.setZero();
    ps->b1.setZero();
    ps->W2.setZero();
    ps->b2.setZero();
  }
  return st;
}

std::pair<double, Eigen::MatrixXd> cross_entropy(const Eigen::MatrixXd& logits,
                                                 const Eigen::VectorXi& labels,
                                                 const std::vector<int>& mask) {
  if (mask.empty()) throw std::runtime_error("cross_entropy: empty mask");
  const auto n = logits.rows();
  const auto C = logits.cols();
  if (labels.size() != n) throw std::runtime_error("cross_entropy: label length mismatch");

  double loss = 0.0;
  Eigen::MatrixXd G = Eigen::MatrixXd::Zero(n, C);
  const double inv = 1.0 / double(mask.size());
  for (int i : mask) {
    if (i < 0 || i >= n) throw std::runtime_error("cross_entropy: mask index out of range");
    const int y = labels[i];
    const double m = logits.row(i).maxCoeff();
    Eigen::ArrayXd e = (logits.row(i).array() - m).exp();
    const double Z = e.sum();
    loss += -(logits(i, y) - m - std::log(Z));
    G.row(i) = (e / Z).matrix() * inv;
    G(i, y) -= inv;
  }
  return {loss * inv, std::move(G)};
}

void adam_step(AdamState& state, ModelParams& params, const ModelParams& grads,
               const TrainConfig& cfg) {
  state.t += 1;
  const double bc1 = 1.0 - std::pow(cfg.adam_beta1, double(state.t));
  const double bc2 = 1.0 - std::pow(cfg.adam_beta2, double(state.t));

  auto update = [&](auto& theta, const auto& grad, auto& m, auto& v) {
    if (theta.size() == 0) return;
    if (grad.size() != theta.size()) throw std::runtime_error("adam_step: gradient shape mismatch");
    auto g = (grad.array() + cfg.weight_decay * theta.array()).eval();
    m.array() = cfg.adam_beta1 * m.array() + (1.0 - cfg.adam_beta1) * g;
    v.array() = cfg.adam_beta2 * v.array() + (1.0 - cfg.adam_beta2) * g.square();
    theta.array() -= cfg.lr * (m.array() / bc1) / ((v.array() / bc2).sqrt() + cfg.adam_eps);
  };

  update(params.W, grads.W, state.m.W, state.v.W);
  update(params.alpha, grads.alpha, state.m.alpha, state.v.alpha);
  update(params.W1, grads.W1, state.m.W1, state.v.W1);
  update(params.b1, grads.b1, state.m.b1, state.v.b1);
  update(params.W2, grads.W2, state.m.W2, state.v.W2);
  update(params.b2, grads.b2, state.m.b2, state.v.b2);
}

double accuracy(const Eigen::MatrixXd& logits, const Eigen::VectorXi& labels,
                const std::vector<int>& mask) {
  if (mask.empty()) throw std::runtime_error("accuracy: empty mask");
  const auto n = logits.rows();
  const auto C = logits.cols();
  long hits = 0;
  for (int i : mask) {
    if (i < 0 || i >= n) throw std::runtime_error("accuracy: mask index out of range");
    int best = 0;
    double bv = logits(i, 0);
    for (int c = 1; c < C; ++c) {
      if (logits(i, c) > bv) {  // strict: ties keep the lowest class index
        bv = logits(i, c);
        best = c;
      }
    }
    if (best == labels[i]) ++hits;
  }
  return double(hits) / double(mask.size());
}

RunResult train_run(ModelKind kind, const ForwardContext& ctx, const Eigen::VectorXi& labels,
                    int num_classes, const SplitSet& split, const TrainConfig& cfg, int hidden) {
  if (cfg.epochs < 1) throw std::runtime_error("train_run: epochs must be >= 1");
  if (!(cfg.lr > 0.0)) throw std::runtime_error("train_run: learning rate must be positive");
  if (split.train.empty() || split.test.empty()) throw std::runtime_error("train_run: empty mask");
  const bool has_val = !split.val.empty();
  const int d = static_cast<int>(ctx.X->cols());

  ModelParams params = init_params(kind, d, num_classes, hidden, ctx.K, cfg.seed);
  AdamState state = make_adam_state(params);

  RunResult res;
  res.loss_trace.reserve(cfg.epochs);

  Eigen::MatrixXd logits = forward(kind, params, ctx);
  auto [loss, G] = cross_entropy(logits, labels, split.train);
  if (!std::isfinite(loss)) throw TrainingDiverged(0);

  double best_val = -1.0;
  Eigen::MatrixXd best_logits;

  for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
    ModelParams grads = backward(kind, params, ctx, G);
    adam_step(state, params, grads, cfg);

    logits = forward(kind, params, ctx);
    std::tie(loss, G) = cross_entropy(logits, labels, split.train);
    if (!std::isfinite(loss)) throw TrainingDiverged(epoch);
    res.loss_trace.push_back(loss);

    if (has_val) {
      const double val = accuracy(logits, labels, split.val);
      if (val > best_val) {  // ties keep the earliest epoch
        best_val = val;
        res.best_epoch = epoch;
        best_logits = logits;
      }
    }
  }

  if (has_val) {
    res.val_accuracy = best_val;
  } else {
    // no validation set: report the final checkpoint
    res.val_accuracy = std::numeric_limits<double>::quiet_NaN();
    res.best_epoch = cfg.epochs;
    best_logits = logits;
  }
  res.test_accuracy = accuracy(best_logits, labels, split.test);
  return res;
}

}  // namespace specfilter
