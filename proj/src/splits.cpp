#include "specfilter/splits.hpp"

#include <algorithm>
#include <fstream>
#include <nlohmann/json.hpp>
#include <stdexcept>

#include "specfilter/rng.hpp"

namespace specfilter {
namespace {

using json = nlohmann::json;

std::vector<std::vector<int>> nodes_by_class(const Dataset& ds) {
  std::vector<std::vector<int>> groups(ds.C);
  for (int i = 0; i < ds.n; ++i) groups[ds.labels[i]].push_back(i);
  return groups;
}

std::vector<int> take_sorted(const std::vector<int>& pool, std::size_t count) {
  std::vector<int> out(pool.begin(), pool.begin() + static_cast<long>(count));
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace

std::string split_tag(SplitKind kind) {
  switch (kind) {
    case SplitKind::Sparse: return "sparse";
    case SplitKind::Public: return "public";
    case SplitKind::Dense: return "dense";
    case SplitKind::Balanced: return "balanced";
  }
  throw std::logic_error("unreachable split kind");
}

SplitKind parse_split(const std::string& tag) {
  if (tag == "sparse") return SplitKind::Sparse;
  if (tag == "public") return SplitKind::Public;
  if (tag == "dense") return SplitKind::Dense;
  if (tag == "balanced") return SplitKind::Balanced;
  throw std::runtime_error("unknown split '" + tag + "' (want sparse|public|dense|balanced)");
}

SplitSet make_sparse(const Dataset& ds, std::uint64_t seed, bool with_val) {
  constexpr int kPerClass = 20;
  constexpr int kTest = 1000;
  constexpr int kVal = 500;

  auto groups = nodes_by_class(ds);
  for (int c = 0; c < ds.C; ++c) {
    if (static_cast<int>(groups[c].size()) < kPerClass) {
      throw std::runtime_error("sparse split: class " + std::to_string(c) + " has only " +
                               std::to_string(groups[c].size()) + " nodes (need 20)");
    }
  }
  const int need = kPerClass * ds.C + kTest + (with_val ? kVal : 0);
  if (ds.n < need) {
    throw std::runtime_error("sparse split: dataset has " + std::to_string(ds.n) +
                             " nodes, needs at least " + std::to_string(need));
  }

  Rng rng(seed);
  SplitSet s;
  s.kind = with_val ? SplitKind::Public : SplitKind::Sparse;
  s.seed = seed;

  std::vector<char> used(ds.n, 0);
  std::vector<int> train;
  for (int c = 0; c < ds.C; ++c) {
    shuffle(groups[c], rng);
    for (int k = 0; k < kPerClass; ++k) {
      train.push_back(groups[c][k]);
      used[groups[c][k]] = 1;
    }
  }
  std::sort(train.begin(), train.end());
  s.train = std::move(train);

  std::vector<int> pool;
  for (int i = 0; i < ds.n; ++i) {
    if (!used[i]) pool.push_back(i);
  }
  shuffle(pool, rng);
  s.test = take_sorted(pool, kTest);
  for (int i : s.test) used[i] = 1;

  if (with_val) {
    std::vector<int> pool2;
    for (int i = 0; i < ds.n; ++i) {
      if (!used[i]) pool2.push_back(i);
    }
    shuffle(pool2, rng);
    s.val = take_sorted(pool2, kVal);
  }

  validate_split(s, ds.n, !with_val);
  return s;
}

SplitSet make_dense(const Dataset& ds, std::uint64_t seed) {
  if (ds.n < 5) throw std::runtime_error("dense split: need at least 5 nodes");
  Rng rng(seed);
  std::vector<int> order(ds.n);
  for (int i = 0; i < ds.n; ++i) order[i] = i;
  shuffle(order, rng);

  // floor(0.6 n) and floor(0.2 n), computed exactly
  const auto n_train = static_cast<std::size_t>(3L * ds.n / 5);
  const auto n_val = static_cast<std::size_t>(ds.n / 5);

  SplitSet s;
  s.kind = SplitKind::Dense;
  s.seed = seed;
  s.train.assign(order.begin(), order.begin() + static_cast<long>(n_train));
  s.val.assign(order.begin() + static_cast<long>(n_train),
               order.begin() + static_cast<long>(n_train + n_val));
  s.test.assign(order.begin() + static_cast<long>(n_train + n_val), order.end());
  std::sort(s.train.begin(), s.train.end());
  std::sort(s.val.begin(), s.val.end());
  std::sort(s.test.begin(), s.test.end());

  validate_split(s, ds.n, false);
  return s;
}

SplitSet make_balanced(const Dataset& ds, std::uint64_t seed) {
  auto groups = nodes_by_class(ds);
  for (int c = 0; c < ds.C; ++c) {
    if (groups[c].size() < 5) {
      throw std::runtime_error("balanced split: class " + std::to_string(c) + " has only " +
                               std::to_string(groups[c].size()) + " nodes (need 5)");
    }
  }

  Rng rng(seed);
  SplitSet s;
  s.kind = SplitKind::Balanced;
  s.seed = seed;
  for (int c = 0; c < ds.C; ++c) {
    auto& g = groups[c];
    shuffle(g, rng);
    const auto sz = g.size();
    const auto n_train = 3 * sz / 5;  // floor(0.6 sz)
    const auto n_val = sz / 5;        // floor(0.2 sz)
    s.train.insert(s.train.end(), g.begin(), g.begin() + static_cast<long>(n_train));
    s.val.insert(s.val.end(), g.begin() + static_cast<long>(n_train),
                 g.begin() + static_cast<long>(n_train + n_val));
    s.test.insert(s.test.end(), g.begin() + static_cast<long>(n_train + n_val), g.end());
  }
  std::sort(s.train.begin(), s.train.end());
  std::sort(s.val.begin(), s.val.end());
  std::sort(s.test.begin(), s.test.end());

  validate_split(s, ds.n, false);
  return s;
}

SplitSet make_split(const Dataset& ds, SplitKind kind, std::uint64_t seed) {
  switch (kind) {
    case SplitKind::Sparse: return make_sparse(ds, seed, false);
    case SplitKind::Public: return make_sparse(ds, 0, true);  // fixed historical seed
    case SplitKind::Dense: return make_dense(ds, seed);
    case SplitKind::Balanced: return make_balanced(ds, seed);
  }
  throw std::logic_error("unreachable split kind");
}

std::vector<SplitSet> make_splits(const Dataset& ds, SplitKind kind, int count) {
  std::vector<SplitSet> out;
  if (kind == SplitKind::Sparse || kind == SplitKind::Public) {
    out.push_back(make_split(ds, kind, 0));
    return out;
  }
  for (int s = 0; s < count; ++s) out.push_back(make_split(ds, kind, s));
  return out;
}

void save_splits(const std::vector<SplitSet>& splits, const std::string& dataset_name,
                 const std::filesystem::path& path) {
  if (splits.empty()) throw std::runtime_error("save_splits: nothing to save");
  for (const auto& s : splits) {
    if (s.kind != splits.front().kind) {
      throw std::runtime_error("save_splits: mixed split kinds in one file");
    }
  }
  json doc;
  doc["dataset"] = dataset_name;
  doc["kind"] = split_tag(splits.front().kind);
  doc["seeds"] = json::array();
  for (const auto& s : splits) {
    json entry;
    entry["seed"] = s.seed;
    entry["train"] = s.train;
    entry["val"] = s.val;
    entry["test"] = s.test;
    doc["seeds"].push_back(std::move(entry));
  }
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  out << doc.dump(2) << "\n";
}

std::vector<SplitSet> load_splits(const std::filesystem::path& path, const Dataset& target) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  json doc = json::parse(in);

  const auto name = doc.at("dataset").get<std::string>();
  if (name != target.name) {
    throw std::runtime_error("split file is for dataset '" + name + "', not '" + target.name + "'");
  }
  SplitKind kind = parse_split(doc.at("kind").get<std::string>());

  std::vector<SplitSet> out;
  for (const auto& entry : doc.at("seeds")) {
    SplitSet s;
    s.kind = kind;
    s.seed = entry.at("seed").get<std::uint64_t>();
    s.train = entry.at("train").get<std::vector<int>>();
    s.val = entry.at("val").get<std::vector<int>>();
    s.test = entry.at("test").get<std::vector<int>>();
    validate_split(s, target.n, true);
    out.push_back(std::move(s));
  }
  return out;
}

SplitSet load_external_masks(const std::filesystem::path& train_path,
                             const std::filesystem::path& val_path,
                             const std::filesystem::path& test_path, const Dataset& target) {
  auto read_mask = [](const std::filesystem::path& p) {
    std::ifstream in(p);
    if (!in) throw std::runtime_error("cannot open mask file " + p.string());
    std::vector<int> out;
    long v = 0;
    while (in >> v) out.push_back(static_cast<int>(v));
    std::sort(out.begin(), out.end());
    return out;
  };
  SplitSet s;
  s.kind = SplitKind::Public;
  s.train = read_mask(train_path);
  if (!val_path.empty()) s.val = read_mask(val_path);
  s.test = read_mask(test_path);
  validate_split(s, target.n, true);
  return s;
}

void validate_split(const SplitSet& s, int n, bool allow_empty_val) {
  if (s.train.empty()) throw std::runtime_error("split: empty train set");
  if (s.test.empty()) throw std::runtime_error("split: empty test set");
  if (s.val.empty() && !allow_empty_val) throw std::runtime_error("split: empty validation set");

  std::vector<char> seen(n, 0);
  auto check = [&](const std::vector<int>& mask, const char* which) {
    for (std::size_t k = 0; k < mask.size(); ++k) {
      int i = mask[k];
      if (i < 0 || i >= n) {
        throw std::runtime_error(std::string("split: ") + which + " index " + std::to_string(i) +
                                 " out of range [0, " + std::to_string(n) + ")");
      }
      if (seen[i]) throw std::runtime_error(std::string("split: index ") + std::to_string(i) +
                                            " appears in more than one mask (or twice)");
      seen[i] = 1;
      if (k > 0 && mask[k - 1] >= i) throw std::runtime_error("split: mask not sorted ascending");
    }
  };
  check(s.train, "train");
  check(s.val, "val");
  check(s.test, "test");
}

}  // namespace specfilter
