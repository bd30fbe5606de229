#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "specfilter/dataset.hpp"
#include "specfilter/filter.hpp"
#include "specfilter/model.hpp"
#include "specfilter/representation.hpp"
#include "specfilter/spectral.hpp"
#include "specfilter/splits.hpp"
#include "specfilter/training.hpp"

namespace specfilter {

// One experiment: a model on a dataset under a split convention, with grids
// over every hyperparameter the model exposes. Axes a model does not use are
// ignored during enumeration.
struct ExperimentPlan {
  std::string dataset;
  ModelKind model = ModelKind::Linear;
  std::vector<ReprKind> reprs = {ReprKind::Adjacency, ReprKind::Laplacian,
                                 ReprKind::NormAdjacency, ReprKind::NormLaplacian};
  std::vector<KernelKind> kernels = {KernelKind::Identity, KernelKind::Linear,
                                     KernelKind::SobolevCompact, KernelKind::SobolevUnbounded,
                                     KernelKind::GaussianRbf};
  std::vector<double> gammas = {0.01, 0.1, 1.0, 10.0};
  std::vector<double> truncs = {0.0};
  std::vector<double> betas = {0.0};
  std::vector<double> lrs = {1e-3, 1e-2, 1e-1};
  std::vector<double> wds = {0.0, 1e-5, 5e-4};
  std::vector<int> hiddens = {16, 64, 256};
  SplitKind split = SplitKind::Balanced;
  std::vector<std::uint64_t> seeds = {0, 1, 2, 3, 4, 5, 6, 7, 8, 9};
  int epochs = 1000;
  bool row_normalize = false;
};

struct GridPoint {
  ReprKind repr = ReprKind::Adjacency;
  KernelSpec kernel;
  double trunc = 0.0;
  double beta = 0.0;
  double lr = 1e-2;
  double wd = 0.0;
  int hidden = 0;
};

std::string point_id(const GridPoint& p);

// Cartesian product over the axes relevant to plan.model, nested in the fixed
// order (repr, kernel, gamma, trunc, beta, lr, wd, hidden). Ties in later
// selection resolve to the earliest point in this order.
std::vector<GridPoint> enumerate_grid(const ExperimentPlan& plan);

struct RunRecord {
  std::string dataset;
  ModelKind model = ModelKind::Linear;
  GridPoint point;
  std::uint64_t seed = 0;
  RunResult result;
  double wall_ms = 0.0;
};

struct AggregateResult {
  double mean_test = 0.0;
  double std_test = 0.0;  // sample std (n-1); 0 for a single seed
  double mean_val = 0.0;
  double std_val = 0.0;
  int seed_count = 0;
  GridPoint chosen;
};

// Ordered trace of what the selection logic looked at; the test suite uses it
// to check that test accuracies are only read after a point has been chosen.
struct SelectionAudit {
  struct Event {
    std::string what;  // "read_val" | "selected" | "read_test"
    std::string point;
  };
  std::vector<Event> events;
};

// Immutable per-dataset state shared by every run: features (optionally
// row-normalized), matrix representations, and full-rank spectral systems.
// Systems are decomposed once and optionally persisted under cache_dir as
// <dataset>.<repr>.spec.
class HarnessContext {
 public:
  HarnessContext(const Dataset& ds, bool row_normalize = false,
                 std::filesystem::path cache_dir = {});

  const Dataset& dataset() const { return ds_; }
  const Eigen::MatrixXd& features() const { return X_; }
  const GraphMatrix& representation(ReprKind kind);
  const SpectralSystem& system(ReprKind kind);

 private:
  const Dataset& ds_;
  Eigen::MatrixXd X_;
  std::filesystem::path cache_dir_;
  std::mutex mu_;
  std::map<ReprKind, GraphMatrix> reprs_;
  std::map<ReprKind, SpectralSystem> systems_;
};

// Every grid point trained over every seed. Records come back point-major,
// seed-minor, independent of the job count.
std::vector<RunRecord> run_plan(const ExperimentPlan& plan, HarnessContext& hc, int jobs = 1);

// Same, but over caller-provided splits (e.g. loaded from a file or external
// mask set) instead of splits generated from plan.split/plan.seeds. The seed
// column of each record comes from the corresponding SplitSet.
std::vector<RunRecord> run_plan(const ExperimentPlan& plan, HarnessContext& hc,
                                const std::vector<SplitSet>& splits, int jobs);

struct ValidationOutcome {
  AggregateResult aggregate;
  std::vector<RunRecord> records;
};

// Grid search with validation-mean selection: trains everything, picks the
// grid point with the highest mean validation accuracy (ties -> earliest),
// and reports that point's test-accuracy statistics.
ValidationOutcome run_validation(const ExperimentPlan& plan, HarnessContext& hc, int jobs = 1,
                                 SelectionAudit* audit = nullptr);

struct KernelAblationRow {
  KernelKind kernel;
  AggregateResult result;
  bool selected = false;  // validation winner across the five kernels
};
std::vector<KernelAblationRow> ablate_kernel(const ExperimentPlan& plan, HarnessContext& hc,
                                             int jobs = 1,
                                             std::vector<RunRecord>* sink = nullptr);

struct ReprAblationResult {
  AggregateResult adjacency;
  AggregateResult laplacian;
  double signed_difference = 0.0;  // adjacency minus laplacian, mean test accuracy
};
ReprAblationResult ablate_representation(const ExperimentPlan& plan, HarnessContext& hc,
                                         int jobs = 1, std::vector<RunRecord>* sink = nullptr);

struct TruncationPoint {
  double factor = 0.0;
  AggregateResult result;
  double relative_to_full = 1.0;
};
// Factors 0, 0.05, ..., 0.95; each validated over the remaining grids.
std::vector<TruncationPoint> ablate_truncation(const ExperimentPlan& plan, HarnessContext& hc,
                                               int jobs = 1,
                                               std::vector<RunRecord>* sink = nullptr);

struct SplitAuditRow {
  std::string dataset;
  std::string probe;  // "XW" or "AXW"
  SplitKind split = SplitKind::Balanced;
  double mean = 0.0;
  double stddev = 0.0;   // meaningful only when seed_count > 1
  int seed_count = 0;
};
// The fixed-hyperparameter probes (lr 1e-3, weight decay 0) under every split
// convention the dataset admits. Sparse and public are single splits and
// carry no uncertainty.
std::vector<SplitAuditRow> audit_splits(const std::vector<const Dataset*>& datasets,
                                        int epochs = 1000, int jobs = 1,
                                        bool row_normalize = false,
                                        std::vector<RunRecord>* sink = nullptr);

// ---- results CSV ----
// Columns: dataset,model,repr,kernel,gamma,trunc,beta,lr,wd,seed,val_acc,
// test_acc,best_epoch,wall_ms. Axes a model does not use are left empty.
extern const char* const kResultsCsvHeader;

void append_results_csv(const std::filesystem::path& path, const std::vector<RunRecord>& records);

struct CsvRow {
  std::string dataset, model, repr, kernel, gamma, trunc, beta, lr, wd, seed;
  std::string val_acc, test_acc, best_epoch, wall_ms;
};
std::vector<CsvRow> read_results_csv(const std::filesystem::path& path);

// ---- reports ----
enum class ReportFormat { Csv, Markdown };

// Table-style cell: mean 0.790, std 0.014 -> "79.0(14)"; no parentheses for a
// single seed.
std::string format_mean_std(double mean, double stddev, int seed_count);

// Validated summary per (dataset, model), recomputed purely from CSV rows so
// re-emission is byte-identical.
void emit_report(const std::vector<CsvRow>& rows, ReportFormat format,
                 const std::filesystem::path& out_path);

// ---- run manifest ----
std::string git_describe();
void append_manifest(const std::filesystem::path& path, const ExperimentPlan& plan,
                     double wall_ms_total);

}  // namespace specfilter
