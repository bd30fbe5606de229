#include <CLI11.hpp>
#include <chrono>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "specfilter/harness.hpp"
#include "specfilter/numeric_io.hpp"

namespace fs = std::filesystem;
using namespace specfilter;

namespace {

struct CommonOpts {
  std::string data;
  std::string out_dir = "results";
  std::string cache_dir;
  int jobs = 1;
  bool row_normalize = false;
};

void add_common(CLI::App* cmd, CommonOpts& c, bool need_data = true) {
  auto* opt = cmd->add_option("--data", c.data, "dataset directory (meta.json + TSV files)");
  if (need_data) opt->required();
  cmd->add_option("--out-dir", c.out_dir, "directory for results.csv / manifest.json / reports");
  cmd->add_option("--cache-dir", c.cache_dir, "directory for spectral decomposition caches");
  cmd->add_option("--jobs", c.jobs, "parallel training jobs")->check(CLI::PositiveNumber);
  cmd->add_flag("--row-normalize", c.row_normalize, "L1-normalize feature rows before training");
}

fs::path results_path(const CommonOpts& c) {
  fs::create_directories(c.out_dir);
  return fs::path(c.out_dir) / "results.csv";
}

fs::path manifest_path(const CommonOpts& c) {
  fs::create_directories(c.out_dir);
  return fs::path(c.out_dir) / "manifest.json";
}

std::vector<std::uint64_t> seed_range(int count) {
  std::vector<std::uint64_t> out;
  for (int s = 0; s < count; ++s) out.push_back(s);
  return out;
}

void print_aggregate(const AggregateResult& agg) {
  std::cout << "chosen: " << point_id(agg.chosen) << "\n";
  std::cout << "test accuracy: " << format_mean_std(agg.mean_test, agg.std_test, agg.seed_count)
            << "  (mean " << format_double(agg.mean_test) << ", std "
            << format_double(agg.std_test) << ", " << agg.seed_count << " seeds)\n";
  std::cout << "validation accuracy: " << format_double(agg.mean_val) << "\n";
}

struct PlanOpts {
  std::string model = "linear";
  std::vector<std::string> reprs;
  std::vector<std::string> kernels;
  std::vector<double> gammas;
  std::vector<double> truncs;
  std::vector<double> betas;
  std::vector<double> lrs;
  std::vector<double> wds;
  std::vector<int> hiddens;
  std::string split = "balanced";
  int seed_count = 10;
  int epochs = 1000;
};

void add_plan_options(CLI::App* cmd, PlanOpts& p) {
  cmd->add_option("--model", p.model, "linear|plin|kernel|lrkernel|mlp2")->required();
  cmd->add_option("--reprs", p.reprs, "representation grid (adj lap nadj nlap)");
  cmd->add_option("--kernels", p.kernels, "kernel grid (id lin sobc sobu rbf)");
  cmd->add_option("--gammas", p.gammas, "bandwidth grid for sobu/rbf");
  cmd->add_option("--truncs", p.truncs, "truncation factor grid, each in [0, 0.95]");
  cmd->add_option("--betas", p.betas, "identity-regularization grid");
  cmd->add_option("--lrs", p.lrs, "learning rate grid");
  cmd->add_option("--wds", p.wds, "weight decay grid");
  cmd->add_option("--hiddens", p.hiddens, "mlp2 hidden width grid");
  cmd->add_option("--split", p.split, "sparse|public|dense|balanced");
  cmd->add_option("--seed-count", p.seed_count, "number of split seeds (0..k-1)")
      ->check(CLI::PositiveNumber);
  cmd->add_option("--epochs", p.epochs, "training epochs per run")->check(CLI::PositiveNumber);
}

ExperimentPlan build_plan(const PlanOpts& po, const CommonOpts& co, const std::string& ds_name) {
  ExperimentPlan plan;
  plan.dataset = ds_name;
  plan.model = parse_model(po.model);
  if (!po.reprs.empty()) {
    plan.reprs.clear();
    for (const auto& t : po.reprs) plan.reprs.push_back(parse_repr(t));
  }
  if (!po.kernels.empty()) {
    plan.kernels.clear();
    for (const auto& t : po.kernels) plan.kernels.push_back(parse_kernel(t));
  }
  if (!po.gammas.empty()) plan.gammas = po.gammas;
  if (!po.truncs.empty()) plan.truncs = po.truncs;
  if (!po.betas.empty()) plan.betas = po.betas;
  if (!po.lrs.empty()) plan.lrs = po.lrs;
  if (!po.wds.empty()) plan.wds = po.wds;
  if (!po.hiddens.empty()) plan.hiddens = po.hiddens;
  plan.split = parse_split(po.split);
  plan.seeds = seed_range(po.seed_count);
  plan.epochs = po.epochs;
  plan.row_normalize = co.row_normalize;
  return plan;
}

int run_train(const CommonOpts& co, const PlanOpts& po, std::uint64_t seed,
              const std::string& splits_file, const std::vector<std::string>& masks) {
  Dataset ds = load_dataset(co.data);
  HarnessContext hc(ds, co.row_normalize, co.cache_dir);

  ExperimentPlan plan = build_plan(po, co, ds.name);
  plan.seeds = {seed};
  if (enumerate_grid(plan).size() != 1) {
    throw std::runtime_error("train runs exactly one grid point; pass single values, not grids");
  }

  const auto t0 = std::chrono::steady_clock::now();
  std::vector<RunRecord> records;
  if (!masks.empty()) {
    if (masks.size() != 3) throw std::runtime_error("--masks wants train,val,test file paths");
    SplitSet s = load_external_masks(masks[0], masks[1], masks[2], ds);
    s.seed = seed;
    records = run_plan(plan, hc, std::vector<SplitSet>{s}, co.jobs);
  } else if (!splits_file.empty()) {
    auto splits = load_splits(splits_file, ds);
    std::vector<SplitSet> chosen;
    for (auto& s : splits) {
      if (s.seed == seed) chosen.push_back(s);
    }
    if (chosen.empty()) {
      throw std::runtime_error("splits file has no entry for seed " + std::to_string(seed));
    }
    records = run_plan(plan, hc, chosen, co.jobs);
  } else {
    records = run_plan(plan, hc, co.jobs);
  }
  const auto t1 = std::chrono::steady_clock::now();

  append_results_csv(results_path(co), records);
  append_manifest(manifest_path(co), plan,
                  std::chrono::duration<double, std::milli>(t1 - t0).count());

  const RunResult& r = records.front().result;
  std::cout << "test accuracy: " << format_double(r.test_accuracy) << "\n";
  std::cout << "validation accuracy: " << format_double(r.val_accuracy) << "\n";
  std::cout << "best epoch: " << r.best_epoch << "\n";
  return 0;
}

int run_validate(const CommonOpts& co, const PlanOpts& po) {
  Dataset ds = load_dataset(co.data);
  HarnessContext hc(ds, co.row_normalize, co.cache_dir);
  ExperimentPlan plan = build_plan(po, co, ds.name);

  const auto t0 = std::chrono::steady_clock::now();
  auto outcome = run_validation(plan, hc, co.jobs);
  const auto t1 = std::chrono::steady_clock::now();

  append_results_csv(results_path(co), outcome.records);
  append_manifest(manifest_path(co), plan,
                  std::chrono::duration<double, std::milli>(t1 - t0).count());
  print_aggregate(outcome.aggregate);
  return 0;
}

int run_ablate(const CommonOpts& co, const PlanOpts& po, const std::string& which) {
  Dataset ds = load_dataset(co.data);
  HarnessContext hc(ds, co.row_normalize, co.cache_dir);
  ExperimentPlan plan = build_plan(po, co, ds.name);
  std::vector<RunRecord> sink;
  const auto t0 = std::chrono::steady_clock::now();

  fs::create_directories(co.out_dir);
  if (which == "kernel") {
    auto rows = ablate_kernel(plan, hc, co.jobs, &sink);
    std::ofstream out(fs::path(co.out_dir) / ("ablate_kernel_" + ds.name + ".csv"));
    out << "dataset,kernel,mean_test,std_test,mean_val,selected\n";
    for (const auto& row : rows) {
      out << ds.name << ',' << kernel_tag(row.kernel) << ','
          << format_double(row.result.mean_test) << ',' << format_double(row.result.std_test)
          << ',' << format_double(row.result.mean_val) << ',' << (row.selected ? 1 : 0) << "\n";
      std::cout << kernel_tag(row.kernel) << ": "
                << format_mean_std(row.result.mean_test, row.result.std_test,
                                   row.result.seed_count)
                << (row.selected ? "  <- validation winner" : "") << "\n";
    }
  } else if (which == "repr") {
    auto res = ablate_representation(plan, hc, co.jobs, &sink);
    std::ofstream out(fs::path(co.out_dir) / ("ablate_repr_" + ds.name + ".csv"));
    out << "dataset,adjacency_mean,laplacian_mean,signed_difference\n";
    out << ds.name << ',' << format_double(res.adjacency.mean_test) << ','
        << format_double(res.laplacian.mean_test) << ',' << format_double(res.signed_difference)
        << "\n";
    std::cout << "adjacency - laplacian = " << format_double(res.signed_difference) << "\n";
  } else if (which == "trunc") {
    auto curve = ablate_truncation(plan, hc, co.jobs, &sink);
    std::ofstream out(fs::path(co.out_dir) / ("ablate_trunc_" + ds.name + ".csv"));
    out << "dataset,factor,mean_test,std_test,relative_to_full\n";
    for (const auto& pt : curve) {
      out << ds.name << ',' << format_double(pt.factor) << ','
          << format_double(pt.result.mean_test) << ',' << format_double(pt.result.std_test) << ','
          << format_double(pt.relative_to_full) << "\n";
      std::cout << "factor " << format_double(pt.factor) << ": relative "
                << format_double(pt.relative_to_full) << "\n";
    }
  } else {
    throw std::runtime_error("unknown ablation '" + which + "'");
  }

  const auto t1 = std::chrono::steady_clock::now();
  append_results_csv(results_path(co), sink);
  append_manifest(manifest_path(co), plan,
                  std::chrono::duration<double, std::milli>(t1 - t0).count());
  return 0;
}

int run_audit(const CommonOpts& co, const std::vector<std::string>& data_dirs, int epochs) {
  std::vector<Dataset> datasets;
  datasets.reserve(data_dirs.size());
  for (const auto& dir : data_dirs) datasets.push_back(load_dataset(dir));
  std::vector<const Dataset*> ptrs;
  for (const auto& ds : datasets) ptrs.push_back(&ds);

  std::vector<RunRecord> sink;
  auto rows = audit_splits(ptrs, epochs, co.jobs, co.row_normalize, &sink);
  append_results_csv(results_path(co), sink);

  std::ofstream out(fs::path(co.out_dir) / "audit_splits.csv");
  out << "dataset,probe,split,mean_test,std_test,seed_count\n";
  std::cout << "| dataset | probe | split | test |\n|---|---|---|---|\n";
  for (const auto& row : rows) {
    out << row.dataset << ',' << row.probe << ',' << split_tag(row.split) << ','
        << format_double(row.mean) << ','
        << (row.seed_count > 1 ? format_double(row.stddev) : std::string()) << ','
        << row.seed_count << "\n";
    std::cout << "| " << row.dataset << " | " << row.probe << " | " << split_tag(row.split)
              << " | " << format_mean_std(row.mean, row.stddev, row.seed_count) << " |\n";
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"spectral-filter graph models for semi-supervised node classification"};
  app.require_subcommand(1);

  // train
  auto train_co = std::make_shared<CommonOpts>();
  auto train_po = std::make_shared<PlanOpts>();
  // single-run defaults; every axis starts as one point
  train_po->reprs = {"adj"};
  train_po->kernels = {"id"};
  train_po->gammas = {1.0};
  train_po->truncs = {0.0};
  train_po->betas = {0.0};
  train_po->lrs = {1e-2};
  train_po->wds = {0.0};
  train_po->hiddens = {64};
  auto train_seed = std::make_shared<std::uint64_t>(0);
  auto train_splits_file = std::make_shared<std::string>();
  auto train_masks = std::make_shared<std::vector<std::string>>();
  auto* train_cmd = app.add_subcommand("train", "train one model configuration on one split");
  add_common(train_cmd, *train_co);
  add_plan_options(train_cmd, *train_po);
  train_cmd->add_option("--seed", *train_seed, "split + initialization seed");
  train_cmd->add_option("--splits-file", *train_splits_file, "saved splits JSON to draw from");
  train_cmd->add_option("--masks", *train_masks,
                        "external mask files: train val test (overrides --split)");
  // single-value aliases for the grid options
  auto bind_single = [&](const char* name, std::vector<double>* tgt, const char* help) {
    train_cmd->add_option(name, [tgt](const CLI::results_t& res) {
      *tgt = {std::stod(res[0])};
      return true;
    }, help)->expected(1);
  };
  bind_single("--lr", &train_po->lrs, "learning rate");
  bind_single("--wd", &train_po->wds, "weight decay");
  bind_single("--gamma", &train_po->gammas, "kernel bandwidth");
  bind_single("--trunc", &train_po->truncs, "truncation factor in [0, 0.95]");
  bind_single("--beta", &train_po->betas, "identity regularization");
  train_cmd->add_option("--repr", [po = train_po](const CLI::results_t& res) {
    po->reprs = {res[0]};
    return true;
  }, "matrix representation (adj|lap|nadj|nlap)")->expected(1);
  train_cmd->add_option("--kernel", [po = train_po](const CLI::results_t& res) {
    po->kernels = {res[0]};
    return true;
  }, "kernel (id|lin|sobc|sobu|rbf)")->expected(1);
  train_cmd->add_option("--hidden", [po = train_po](const CLI::results_t& res) {
    po->hiddens = {std::stoi(res[0])};
    return true;
  }, "mlp2 hidden width")->expected(1);

  // validate
  auto val_co = std::make_shared<CommonOpts>();
  auto val_po = std::make_shared<PlanOpts>();
  auto* val_cmd = app.add_subcommand("validate", "grid search with validation-mean selection");
  add_common(val_cmd, *val_co);
  add_plan_options(val_cmd, *val_po);

  // ablate {kernel|repr|trunc}
  auto* ablate_cmd = app.add_subcommand("ablate", "hyperparameter ablations");
  ablate_cmd->require_subcommand(1);
  struct AblateSub {
    CLI::App* cmd;
    std::shared_ptr<CommonOpts> co;
    std::shared_ptr<PlanOpts> po;
    std::string which;
  };
  std::vector<AblateSub> ablates;
  for (const char* which : {"kernel", "repr", "trunc"}) {
    AblateSub sub;
    sub.which = which;
    sub.co = std::make_shared<CommonOpts>();
    sub.po = std::make_shared<PlanOpts>();
    sub.cmd = ablate_cmd->add_subcommand(which, std::string("ablate ") + which);
    add_common(sub.cmd, *sub.co);
    add_plan_options(sub.cmd, *sub.po);
    ablates.push_back(sub);
  }

  // audit-splits
  auto audit_co = std::make_shared<CommonOpts>();
  auto audit_dirs = std::make_shared<std::vector<std::string>>();
  auto audit_epochs = std::make_shared<int>(1000);
  auto* audit_cmd =
      app.add_subcommand("audit-splits", "fixed linear probes under every split convention");
  add_common(audit_cmd, *audit_co, false);
  audit_cmd->add_option("--datasets", *audit_dirs, "dataset directories")->required();
  audit_cmd->add_option("--epochs", *audit_epochs, "training epochs per run");

  // splits gen
  auto splits_co = std::make_shared<CommonOpts>();
  auto splits_kind = std::make_shared<std::string>("balanced");
  auto splits_count = std::make_shared<int>(10);
  auto splits_out = std::make_shared<std::string>();
  auto* splits_cmd = app.add_subcommand("splits", "split utilities");
  auto* splits_gen = splits_cmd->add_subcommand("gen", "generate and save split sets");
  add_common(splits_gen, *splits_co);
  splits_gen->add_option("--kind", *splits_kind, "sparse|public|dense|balanced");
  splits_gen->add_option("--count", *splits_count, "seeds 0..count-1 for multi-seed kinds");
  splits_gen->add_option("--out", *splits_out, "output JSON path")->required();

  // spectral cache
  auto spec_co = std::make_shared<CommonOpts>();
  auto spec_repr = std::make_shared<std::string>("adj");
  auto spec_trunc = std::make_shared<double>(0.0);
  auto spec_out = std::make_shared<std::string>();
  auto* spectral_cmd = app.add_subcommand("spectral", "spectral decomposition utilities");
  auto* spec_cache = spectral_cmd->add_subcommand("cache", "decompose and persist a system");
  add_common(spec_cache, *spec_co);
  spec_cache->add_option("--repr", *spec_repr, "adj|lap|nadj|nlap");
  spec_cache->add_option("--trunc", *spec_trunc, "truncate before saving");
  spec_cache->add_option("--out", *spec_out, "output .spec path (default cache-dir naming)");

  // report
  auto report_in = std::make_shared<std::string>();
  auto report_md = std::make_shared<std::string>();
  auto report_csv = std::make_shared<std::string>();
  auto* report_cmd = app.add_subcommand("report", "summary tables from a results CSV");
  report_cmd->add_option("--in", *report_in, "results.csv path")->required();
  report_cmd->add_option("--out-md", *report_md, "markdown table output");
  report_cmd->add_option("--out-csv", *report_csv, "aggregated CSV output");

  CLI11_PARSE(app, argc, argv);

  try {
    if (train_cmd->parsed()) {
      return run_train(*train_co, *train_po, *train_seed, *train_splits_file, *train_masks);
    }
    if (val_cmd->parsed()) return run_validate(*val_co, *val_po);
    for (const auto& sub : ablates) {
      if (sub.cmd->parsed()) return run_ablate(*sub.co, *sub.po, sub.which);
    }
    if (audit_cmd->parsed()) return run_audit(*audit_co, *audit_dirs, *audit_epochs);
    if (splits_gen->parsed()) {
      Dataset ds = load_dataset(splits_co->data);
      auto splits = make_splits(ds, parse_split(*splits_kind), *splits_count);
      save_splits(splits, ds.name, *splits_out);
      std::cout << "wrote " << splits.size() << " split sets to " << *splits_out << "\n";
      return 0;
    }
    if (spec_cache->parsed()) {
      Dataset ds = load_dataset(spec_co->data);
      GraphMatrix M = build_representation(ds, parse_repr(*spec_repr));
      SpectralSystem sys = decompose(M);
      if (*spec_trunc > 0.0) sys = truncate(sys, *spec_trunc);
      fs::path out = *spec_out;
      if (out.empty()) {
        fs::path dir = spec_co->cache_dir.empty() ? fs::path(".") : fs::path(spec_co->cache_dir);
        fs::create_directories(dir);
        out = dir / (ds.name + "." + *spec_repr + ".spec");
      }
      save_cache(sys, out);
      std::cout << "cached rank-" << sys.r << " system to " << out.string() << "\n";
      return 0;
    }
    if (report_cmd->parsed()) {
      auto rows = read_results_csv(*report_in);
      if (report_md->empty() && report_csv->empty()) {
        throw std::runtime_error("report: pass --out-md and/or --out-csv");
      }
      if (!report_md->empty()) emit_report(rows, ReportFormat::Markdown, *report_md);
      if (!report_csv->empty()) emit_report(rows, ReportFormat::Csv, *report_csv);
      return 0;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
