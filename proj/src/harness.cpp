#include "specfilter/harness.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <limits>
#include <nlohmann/json.hpp>
#include <set>
#include <sstream>
#include <stdexcept>
#include <thread>
#include <tuple>

#include "specfilter/numeric_io.hpp"

namespace specfilter {
namespace {

using json = nlohmann::json;

bool uses_repr(ModelKind m) {
  return m == ModelKind::PropLinear || m == ModelKind::Kernel || m == ModelKind::LrKernel;
}
bool uses_kernel(ModelKind m) { return m == ModelKind::Kernel || m == ModelKind::LrKernel; }
bool uses_beta(ModelKind m) { return uses_repr(m); }
bool uses_trunc(ModelKind m) { return m == ModelKind::LrKernel; }
bool uses_hidden(ModelKind m) { return m == ModelKind::Mlp2; }

double mean_of(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return s / double(v.size());
}

double sample_std(const std::vector<double>& v) {
  if (v.size() < 2) return 0.0;
  const double m = mean_of(v);
  double s = 0.0;
  for (double x : v) s += (x - m) * (x - m);
  return std::sqrt(s / double(v.size() - 1));
}

// Runs fn(0..count-1) on up to `jobs` threads; rethrows the lowest-index
// failure so errors are reproducible regardless of scheduling.
void parallel_for(std::size_t count, int jobs, const std::function<void(std::size_t)>& fn) {
  jobs = std::max(1, jobs);
  if (jobs == 1 || count <= 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::exception_ptr> errors(count);
  auto worker = [&] {
    while (true) {
      std::size_t i = next.fetch_add(1);
      if (i >= count) return;
      try {
        fn(i);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  std::vector<std::thread> pool;
  const int nthreads = static_cast<int>(std::min<std::size_t>(jobs, count));
  pool.reserve(nthreads);
  for (int t = 0; t < nthreads; ++t) pool.emplace_back(worker);
  for (auto& th : pool) th.join();
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

// Owns the per-point pieces a ForwardContext points into.
struct PointStorage {
  Eigen::MatrixXd P_reg;
  KernelMatrix K;
  ForwardContext ctx;
};

void prepare_point(const ExperimentPlan& plan, HarnessContext& hc, const GridPoint& p,
                   PointStorage& store) {
  store.ctx = {};
  store.ctx.X = &hc.features();
  switch (plan.model) {
    case ModelKind::Linear:
    case ModelKind::Mlp2:
      break;
    case ModelKind::PropLinear: {
      const GraphMatrix& R = hc.representation(p.repr);
      if (p.beta != 0.0) {
        store.P_reg = regularize(R.values, p.beta);
        store.ctx.P = &store.P_reg;
      } else {
        store.ctx.P = &R.values;
      }
      break;
    }
    case ModelKind::Kernel:
    case ModelKind::LrKernel: {
      const SpectralSystem& sys = hc.system(p.repr);
      const auto keep = sys.n - static_cast<Eigen::Index>(std::floor(p.trunc * double(sys.n)));
      store.K = kernel_matrix(p.kernel, sys.values.head(keep));
      store.ctx.sys = &sys;
      store.ctx.K = &store.K;
      store.ctx.beta = p.beta;
      break;
    }
  }
}

void check_plan(const ExperimentPlan& plan) {
  if (plan.seeds.empty()) throw std::runtime_error("plan: no seeds");
  std::set<std::uint64_t> uniq(plan.seeds.begin(), plan.seeds.end());
  if (uniq.size() != plan.seeds.size()) throw std::runtime_error("plan: duplicate seeds");
  if (plan.epochs < 1) throw std::runtime_error("plan: epochs must be >= 1");
}

int kernel_order(const std::string& tag) {
  if (tag.empty()) return -1;
  return static_cast<int>(parse_kernel(tag));
}
int repr_order(const std::string& tag) {
  if (tag.empty()) return -1;
  return static_cast<int>(parse_repr(tag));
}
double num_or(const std::string& s, double fallback) {
  return s.empty() ? fallback : parse_double(s);
}

}  // namespace

std::string point_id(const GridPoint& p) {
  std::string id = "repr=" + repr_tag(p.repr) + ",kernel=" + kernel_tag(p.kernel.kind);
  if (p.kernel.gamma) id += "@" + format_double(*p.kernel.gamma);
  id += ",trunc=" + format_double(p.trunc) + ",beta=" + format_double(p.beta) +
        ",lr=" + format_double(p.lr) + ",wd=" + format_double(p.wd);
  if (p.hidden > 0) id += ",hidden=" + std::to_string(p.hidden);
  return id;
}

std::vector<GridPoint> enumerate_grid(const ExperimentPlan& plan) {
  const ModelKind m = plan.model;
  auto require = [](bool ok, const char* what) {
    if (!ok) throw std::runtime_error(std::string("plan: empty grid for ") + what);
  };
  require(!plan.lrs.empty(), "lr");
  require(!plan.wds.empty(), "wd");

  std::vector<ReprKind> reprs = uses_repr(m) ? plan.reprs : std::vector<ReprKind>{ReprKind::Adjacency};
  require(!reprs.empty(), "repr");
  std::vector<KernelKind> kernels =
      uses_kernel(m) ? plan.kernels : std::vector<KernelKind>{KernelKind::Identity};
  require(!kernels.empty(), "kernel");
  std::vector<double> truncs = uses_trunc(m) ? plan.truncs : std::vector<double>{0.0};
  require(!truncs.empty(), "trunc");
  std::vector<double> betas = uses_beta(m) ? plan.betas : std::vector<double>{0.0};
  require(!betas.empty(), "beta");
  std::vector<int> hiddens = uses_hidden(m) ? plan.hiddens : std::vector<int>{0};
  require(!hiddens.empty(), "hidden");

  std::vector<GridPoint> out;
  for (ReprKind repr : reprs) {
    for (KernelKind kk : kernels) {
      std::vector<std::optional<double>> gammas;
      if (uses_kernel(m) && (kk == KernelKind::SobolevUnbounded || kk == KernelKind::GaussianRbf)) {
        require(!plan.gammas.empty(), "gamma");
        for (double g : plan.gammas) gammas.emplace_back(g);
      } else {
        gammas.emplace_back(std::nullopt);
      }
      for (const auto& gamma : gammas) {
        for (double trunc : truncs) {
          for (double beta : betas) {
            for (double lr : plan.lrs) {
              for (double wd : plan.wds) {
                for (int hidden : hiddens) {
                  GridPoint p;
                  p.repr = repr;
                  p.kernel = KernelSpec{kk, gamma};
                  p.trunc = trunc;
                  p.beta = beta;
                  p.lr = lr;
                  p.wd = wd;
                  p.hidden = hidden;
                  out.push_back(p);
                }
              }
            }
          }
        }
      }
    }
  }
  return out;
}

HarnessContext::HarnessContext(const Dataset& ds, bool row_norm, std::filesystem::path cache_dir)
    : ds_(ds), cache_dir_(std::move(cache_dir)) {
  X_ = row_norm ? row_normalize(ds.features) : ds.features;
}

const GraphMatrix& HarnessContext::representation(ReprKind kind) {
  std::lock_guard lock(mu_);
  auto it = reprs_.find(kind);
  if (it == reprs_.end()) {
    it = reprs_.emplace(kind, build_representation(ds_, kind)).first;
  }
  return it->second;
}

const SpectralSystem& HarnessContext::system(ReprKind kind) {
  {
    std::lock_guard lock(mu_);
    auto it = systems_.find(kind);
    if (it != systems_.end()) return it->second;
  }

  SpectralSystem sys;
  std::filesystem::path cache_file;
  if (!cache_dir_.empty()) {
    cache_file = cache_dir_ / (ds_.name + "." + repr_tag(kind) + ".spec");
  }
  if (!cache_file.empty() && std::filesystem::exists(cache_file)) {
    sys = load_cache(cache_file);
    if (sys.n != ds_.n) {
      throw std::runtime_error("spectral cache " + cache_file.string() + " is for n=" +
                               std::to_string(sys.n) + ", dataset has n=" + std::to_string(ds_.n));
    }
    sys.source_kind = kind;
  } else {
    sys = decompose(representation(kind));
    if (!cache_file.empty()) {
      std::filesystem::create_directories(cache_dir_);
      save_cache(sys, cache_file);
    }
  }

  std::lock_guard lock(mu_);
  return systems_.emplace(kind, std::move(sys)).first->second;
}

namespace {

std::vector<RunRecord> run_plan_over(const ExperimentPlan& plan, HarnessContext& hc,
                                     const std::vector<SplitSet>& splits, int jobs) {
  const auto grid = enumerate_grid(plan);
  const Dataset& ds = hc.dataset();
  const std::size_t S = splits.size();

  std::vector<RunRecord> records(grid.size() * S);
  for (std::size_t pi = 0; pi < grid.size(); ++pi) {
    const GridPoint& p = grid[pi];
    PointStorage store;
    prepare_point(plan, hc, p, store);

    parallel_for(S, jobs, [&](std::size_t si) {
      const SplitSet& split = splits[si];
      const std::uint64_t seed = split.seed;
      try {
        TrainConfig cfg;
        cfg.lr = p.lr;
        cfg.weight_decay = p.wd;
        cfg.epochs = plan.epochs;
        cfg.seed = seed;
        const auto t0 = std::chrono::steady_clock::now();
        RunResult rr = train_run(plan.model, store.ctx, ds.labels, ds.C, split, cfg, p.hidden);
        const auto t1 = std::chrono::steady_clock::now();

        RunRecord& rec = records[pi * S + si];
        rec.dataset = plan.dataset.empty() ? ds.name : plan.dataset;
        rec.model = plan.model;
        rec.point = p;
        rec.seed = seed;
        rec.result = std::move(rr);
        rec.wall_ms = std::chrono::duration<double, std::milli>(t1 - t0).count();
      } catch (const std::exception& e) {
        throw std::runtime_error("grid point [" + point_id(p) + "] seed " + std::to_string(seed) +
                                 ": " + e.what());
      }
    });
  }
  return records;
}

}  // namespace

std::vector<RunRecord> run_plan(const ExperimentPlan& plan, HarnessContext& hc, int jobs) {
  check_plan(plan);
  std::vector<SplitSet> splits;
  splits.reserve(plan.seeds.size());
  for (std::uint64_t seed : plan.seeds) splits.push_back(make_split(hc.dataset(), plan.split, seed));
  return run_plan_over(plan, hc, splits, jobs);
}

std::vector<RunRecord> run_plan(const ExperimentPlan& plan, HarnessContext& hc,
                                const std::vector<SplitSet>& splits, int jobs) {
  if (splits.empty()) throw std::runtime_error("run_plan: no splits provided");
  if (plan.epochs < 1) throw std::runtime_error("plan: epochs must be >= 1");
  for (const auto& s : splits) validate_split(s, hc.dataset().n, true);
  return run_plan_over(plan, hc, splits, jobs);
}

ValidationOutcome run_validation(const ExperimentPlan& plan, HarnessContext& hc, int jobs,
                                 SelectionAudit* audit) {
  const auto grid = enumerate_grid(plan);
  ValidationOutcome out;
  out.records = run_plan(plan, hc, jobs);
  const std::size_t S = plan.seeds.size();

  std::vector<double> mean_vals(grid.size());
  for (std::size_t pi = 0; pi < grid.size(); ++pi) {
    std::vector<double> vals;
    vals.reserve(S);
    for (std::size_t si = 0; si < S; ++si) {
      vals.push_back(out.records[pi * S + si].result.val_accuracy);
    }
    mean_vals[pi] = mean_of(vals);
    if (audit) audit->events.push_back({"read_val", point_id(grid[pi])});
    if (std::isnan(mean_vals[pi]) && grid.size() > 1) {
      throw std::runtime_error("validation selection needs a split with a validation set");
    }
  }

  std::size_t best = 0;
  for (std::size_t pi = 1; pi < grid.size(); ++pi) {
    if (mean_vals[pi] > mean_vals[best]) best = pi;  // ties keep the earliest point
  }
  if (audit) audit->events.push_back({"selected", point_id(grid[best])});

  std::vector<double> tests, vals;
  for (std::size_t si = 0; si < S; ++si) {
    const RunRecord& rec = out.records[best * S + si];
    if (audit) audit->events.push_back({"read_test", point_id(grid[best])});
    tests.push_back(rec.result.test_accuracy);
    vals.push_back(rec.result.val_accuracy);
  }

  out.aggregate.mean_test = mean_of(tests);
  out.aggregate.std_test = sample_std(tests);
  out.aggregate.mean_val = mean_vals[best];
  out.aggregate.std_val = sample_std(vals);
  out.aggregate.seed_count = static_cast<int>(S);
  out.aggregate.chosen = grid[best];
  return out;
}

std::vector<KernelAblationRow> ablate_kernel(const ExperimentPlan& plan, HarnessContext& hc,
                                             int jobs, std::vector<RunRecord>* sink) {
  if (!uses_kernel(plan.model)) {
    throw std::runtime_error("kernel ablation requires a kernel model");
  }
  std::vector<KernelAblationRow> rows;
  for (KernelKind kk : plan.kernels) {
    ExperimentPlan sub = plan;
    sub.kernels = {kk};
    auto outcome = run_validation(sub, hc, jobs);
    if (sink) sink->insert(sink->end(), outcome.records.begin(), outcome.records.end());
    rows.push_back({kk, outcome.aggregate, false});
  }
  std::size_t best = 0;
  for (std::size_t i = 1; i < rows.size(); ++i) {
    if (rows[i].result.mean_val > rows[best].result.mean_val) best = i;
  }
  if (!rows.empty()) rows[best].selected = true;
  return rows;
}

ReprAblationResult ablate_representation(const ExperimentPlan& plan, HarnessContext& hc, int jobs,
                                         std::vector<RunRecord>* sink) {
  if (!uses_repr(plan.model)) {
    throw std::runtime_error("representation ablation requires a propagation-based model");
  }
  ReprAblationResult res;
  for (ReprKind kind : {ReprKind::Adjacency, ReprKind::Laplacian}) {
    ExperimentPlan sub = plan;
    sub.reprs = {kind};
    auto outcome = run_validation(sub, hc, jobs);
    if (sink) sink->insert(sink->end(), outcome.records.begin(), outcome.records.end());
    (kind == ReprKind::Adjacency ? res.adjacency : res.laplacian) = outcome.aggregate;
  }
  res.signed_difference = res.adjacency.mean_test - res.laplacian.mean_test;
  return res;
}

std::vector<TruncationPoint> ablate_truncation(const ExperimentPlan& plan, HarnessContext& hc,
                                               int jobs, std::vector<RunRecord>* sink) {
  if (!uses_kernel(plan.model)) {
    throw std::runtime_error("truncation ablation requires a kernel model");
  }
  std::vector<TruncationPoint> curve;
  double full_rank_mean = 0.0;
  for (int k = 0; k < 20; ++k) {
    const double factor = 0.05 * k;
    ExperimentPlan sub = plan;
    sub.model = ModelKind::LrKernel;
    sub.truncs = {factor};
    auto outcome = run_validation(sub, hc, jobs);
    if (sink) sink->insert(sink->end(), outcome.records.begin(), outcome.records.end());

    TruncationPoint pt;
    pt.factor = factor;
    pt.result = outcome.aggregate;
    if (k == 0) {
      full_rank_mean = outcome.aggregate.mean_test;
      pt.relative_to_full = 1.0;
    } else {
      pt.relative_to_full =
          full_rank_mean != 0.0 ? outcome.aggregate.mean_test / full_rank_mean
                                : std::numeric_limits<double>::quiet_NaN();
    }
    curve.push_back(pt);
  }
  return curve;
}

std::vector<SplitAuditRow> audit_splits(const std::vector<const Dataset*>& datasets, int epochs,
                                        int jobs, bool row_norm, std::vector<RunRecord>* sink) {
  std::vector<SplitAuditRow> rows;
  for (const Dataset* ds : datasets) {
    HarnessContext hc(*ds, row_norm);
    for (SplitKind kind :
         {SplitKind::Sparse, SplitKind::Public, SplitKind::Dense, SplitKind::Balanced}) {
      try {
        make_split(*ds, kind, 0);
      } catch (const std::exception&) {
        continue;  // convention not applicable to this dataset
      }
      const bool single = kind == SplitKind::Sparse || kind == SplitKind::Public;
      for (ModelKind probe : {ModelKind::Linear, ModelKind::PropLinear}) {
        ExperimentPlan plan;
        plan.dataset = ds->name;
        plan.model = probe;
        plan.reprs = {ReprKind::Adjacency};
        plan.lrs = {1e-3};  // fixed probe hyperparameters
        plan.wds = {0.0};
        plan.split = kind;
        plan.seeds.clear();
        if (single) {
          plan.seeds = {0};
        } else {
          for (std::uint64_t s = 0; s < 10; ++s) plan.seeds.push_back(s);
        }
        plan.epochs = epochs;
        plan.row_normalize = row_norm;

        auto records = run_plan(plan, hc, jobs);
        if (sink) sink->insert(sink->end(), records.begin(), records.end());
        std::vector<double> tests;
        for (const auto& rec : records) tests.push_back(rec.result.test_accuracy);

        SplitAuditRow row;
        row.dataset = ds->name;
        row.probe = probe == ModelKind::Linear ? "XW" : "AXW";
        row.split = kind;
        row.mean = mean_of(tests);
        row.stddev = sample_std(tests);
        row.seed_count = static_cast<int>(tests.size());
        rows.push_back(row);
      }
    }
  }
  return rows;
}

// ---- results CSV ----

const char* const kResultsCsvHeader =
    "dataset,model,repr,kernel,gamma,trunc,beta,lr,wd,seed,val_acc,test_acc,best_epoch,wall_ms";

void append_results_csv(const std::filesystem::path& path, const std::vector<RunRecord>& records) {
  const bool fresh = !std::filesystem::exists(path) || std::filesystem::file_size(path) == 0;
  std::ofstream out(path, std::ios::app);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  if (fresh) out << kResultsCsvHeader << "\n";
  for (const auto& rec : records) {
    const ModelKind m = rec.model;
    out << rec.dataset << ',' << model_tag(m) << ',';
    out << (uses_repr(m) ? repr_tag(rec.point.repr) : "") << ',';
    out << (uses_kernel(m) ? kernel_tag(rec.point.kernel.kind) : "") << ',';
    out << (uses_kernel(m) && rec.point.kernel.gamma ? format_double(*rec.point.kernel.gamma) : "")
        << ',';
    out << (uses_kernel(m) ? format_double(rec.point.trunc) : "") << ',';
    out << (uses_beta(m) ? format_double(rec.point.beta) : "") << ',';
    out << format_double(rec.point.lr) << ',' << format_double(rec.point.wd) << ',';
    out << rec.seed << ',';
    out << format_double(rec.result.val_accuracy) << ',';
    out << format_double(rec.result.test_accuracy) << ',';
    out << rec.result.best_epoch << ',';
    out << format_double(rec.wall_ms) << "\n";
  }
}

std::vector<CsvRow> read_results_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::string line;
  if (!std::getline(in, line) || line != kResultsCsvHeader) {
    throw std::runtime_error(path.string() + ": unexpected results CSV header");
  }
  std::vector<CsvRow> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<std::string> f;
    std::size_t start = 0;
    while (true) {
      std::size_t comma = line.find(',', start);
      if (comma == std::string::npos) {
        f.push_back(line.substr(start));
        break;
      }
      f.push_back(line.substr(start, comma - start));
      start = comma + 1;
    }
    if (f.size() != 14) throw std::runtime_error(path.string() + ": malformed CSV row");
    rows.push_back({f[0], f[1], f[2], f[3], f[4], f[5], f[6], f[7], f[8], f[9], f[10], f[11],
                    f[12], f[13]});
  }
  return rows;
}

// ---- reports ----

std::string format_mean_std(double mean, double stddev, int seed_count) {
  char buf[64];
  if (seed_count > 1) {
    std::snprintf(buf, sizeof(buf), "%.1f(%.0f)", mean * 100.0, stddev * 1000.0);
  } else {
    std::snprintf(buf, sizeof(buf), "%.1f", mean * 100.0);
  }
  return buf;
}

void emit_report(const std::vector<CsvRow>& rows, ReportFormat format,
                 const std::filesystem::path& out_path) {
  // cell = one hyperparameter point of one (dataset, model)
  struct Cell {
    std::vector<double> vals, tests;
    CsvRow sample;
  };
  std::map<std::pair<std::string, std::string>, std::map<std::string, Cell>> groups;
  for (const auto& r : rows) {
    const std::string cell_key =
        r.repr + "|" + r.kernel + "|" + r.gamma + "|" + r.trunc + "|" + r.beta + "|" + r.lr + "|" +
        r.wd;
    auto& cell = groups[{r.dataset, r.model}][cell_key];
    cell.vals.push_back(parse_double(r.val_acc));
    cell.tests.push_back(parse_double(r.test_acc));
    cell.sample = r;
  }

  struct Line {
    CsvRow sample;
    double mean_test, std_test;
    int seeds;
  };
  std::vector<Line> lines;
  for (auto& [key, cells] : groups) {
    // deterministic selection order: grid axes compared numerically, in the
    // same nesting order the harness enumerates
    std::vector<std::pair<std::tuple<int, int, double, double, double, double, double>,
                          const Cell*>> ordered;
    for (auto& [ck, cell] : cells) {
      ordered.push_back({{repr_order(cell.sample.repr), kernel_order(cell.sample.kernel),
                          num_or(cell.sample.gamma, -1.0), num_or(cell.sample.trunc, 0.0),
                          num_or(cell.sample.beta, 0.0), parse_double(cell.sample.lr),
                          parse_double(cell.sample.wd)},
                         &cell});
    }
    std::sort(ordered.begin(), ordered.end(),
              [](const auto& a, const auto& b) { return a.first < b.first; });

    const Cell* best = nullptr;
    double best_val = -std::numeric_limits<double>::infinity();
    for (const auto& [ok, cell] : ordered) {
      double mv = mean_of(cell->vals);
      if (std::isnan(mv)) mv = -std::numeric_limits<double>::infinity();
      if (!best || mv > best_val) {
        best = cell;
        best_val = mv;
      }
    }
    if (!best) continue;
    lines.push_back({best->sample, mean_of(best->tests), sample_std(best->tests),
                     static_cast<int>(best->tests.size())});
  }

  std::ofstream out(out_path);
  if (!out) throw std::runtime_error("cannot open " + out_path.string() + " for writing");

  if (format == ReportFormat::Csv) {
    out << "dataset,model,repr,kernel,gamma,trunc,beta,lr,wd,seed_count,mean_test,std_test\n";
    for (const auto& l : lines) {
      out << l.sample.dataset << ',' << l.sample.model << ',' << l.sample.repr << ','
          << l.sample.kernel << ',' << l.sample.gamma << ',' << l.sample.trunc << ','
          << l.sample.beta << ',' << l.sample.lr << ',' << l.sample.wd << ',' << l.seeds << ','
          << format_double(l.mean_test) << ',' << format_double(l.std_test) << "\n";
    }
    return;
  }

  out << "| dataset | model | repr | kernel | gamma | trunc | beta | lr | wd | seeds | test |\n";
  out << "|---|---|---|---|---|---|---|---|---|---|---|\n";
  for (const auto& l : lines) {
    out << "| " << l.sample.dataset << " | " << l.sample.model << " | " << l.sample.repr << " | "
        << l.sample.kernel << " | " << l.sample.gamma << " | " << l.sample.trunc << " | "
        << l.sample.beta << " | " << l.sample.lr << " | " << l.sample.wd << " | " << l.seeds
        << " | " << format_mean_std(l.mean_test, l.std_test, l.seeds) << " |\n";
  }
  out << "\nParenthesized uncertainties are sample standard deviations over split seeds, in "
         "units of the final shown digit. Externally cited baselines sometimes report 95% "
         "confidence intervals instead; no such intervals are computed here.\n";
}

// ---- run manifest ----

std::string git_describe() {
  FILE* pipe = ::popen("git describe --always --dirty 2>/dev/null", "r");
  if (!pipe) return "unknown";
  char buf[256];
  std::string out;
  while (std::fgets(buf, sizeof(buf), pipe)) out += buf;
  ::pclose(pipe);
  while (!out.empty() && (out.back() == '\n' || out.back() == '\r')) out.pop_back();
  return out.empty() ? "unknown" : out;
}

void append_manifest(const std::filesystem::path& path, const ExperimentPlan& plan,
                     double wall_ms_total) {
  json doc = json::array();
  if (std::filesystem::exists(path)) {
    std::ifstream in(path);
    try {
      doc = json::parse(in);
    } catch (const json::parse_error&) {
      doc = json::array();
    }
    if (!doc.is_array()) doc = json::array();
  }

  json grids;
  json reprs = json::array(), kernels = json::array();
  for (ReprKind r : plan.reprs) reprs.push_back(repr_tag(r));
  for (KernelKind k : plan.kernels) kernels.push_back(kernel_tag(k));
  grids["reprs"] = reprs;
  grids["kernels"] = kernels;
  grids["gammas"] = plan.gammas;
  grids["truncs"] = plan.truncs;
  grids["betas"] = plan.betas;
  grids["lrs"] = plan.lrs;
  grids["wds"] = plan.wds;
  grids["hiddens"] = plan.hiddens;

  json entry;
  entry["dataset"] = plan.dataset;
  entry["model"] = model_tag(plan.model);
  entry["split"] = split_tag(plan.split);
  entry["seeds"] = plan.seeds;
  entry["epochs"] = plan.epochs;
  entry["row_normalize"] = plan.row_normalize;
  entry["grids"] = grids;
  entry["git"] = git_describe();
  entry["wall_ms"] = wall_ms_total;
  doc.push_back(std::move(entry));

  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  out << doc.dump(2) << "\n";
}

}  // namespace specfilter
