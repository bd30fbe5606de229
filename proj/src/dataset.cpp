#include "specfilter/dataset.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <nlohmann/json.hpp>
#include <sstream>
#include <stdexcept>
#include <unordered_map>

#include "specfilter/numeric_io.hpp"
#include "specfilter/rng.hpp"

namespace specfilter {
namespace {

using json = nlohmann::json;

std::vector<std::string> split_tabs(const std::string& line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    std::size_t tab = line.find('\t', start);
    if (tab == std::string::npos) {
      out.push_back(line.substr(start));
      return out;
    }
    out.push_back(line.substr(start, tab - start));
    start = tab + 1;
  }
}

std::ifstream open_or_throw(const std::filesystem::path& p) {
  std::ifstream in(p);
  if (!in) throw std::runtime_error("cannot open " + p.string());
  return in;
}

void canonicalize_edges(Dataset& ds) {
  if (!ds.directed) {
    for (auto& [s, t] : ds.edges) {
      if (s > t) std::swap(s, t);
    }
  }
  std::sort(ds.edges.begin(), ds.edges.end());
  ds.edges.erase(std::unique(ds.edges.begin(), ds.edges.end()), ds.edges.end());
}

}  // namespace

Dataset load_dataset(const std::filesystem::path& dir) {
  Dataset ds;

  {
    auto in = open_or_throw(dir / "meta.json");
    json meta = json::parse(in);
    ds.name = meta.at("name").get<std::string>();
    ds.n = meta.at("n").get<int>();
    ds.d = meta.at("d").get<int>();
    ds.C = meta.at("C").get<int>();
    ds.directed = meta.at("directed").get<bool>();
    if (ds.n <= 0 || ds.d <= 0 || ds.C <= 0) {
      throw std::runtime_error(dir.string() + ": meta.json has non-positive dimensions");
    }
  }

  {
    auto in = open_or_throw(dir / "features.tsv");
    ds.features.resize(ds.n, ds.d);
    std::string line;
    for (int i = 0; i < ds.n; ++i) {
      if (!std::getline(in, line)) {
        throw std::runtime_error("features.tsv: expected " + std::to_string(ds.n) +
                                 " rows, got " + std::to_string(i));
      }
      auto fields = split_tabs(line);
      if (static_cast<int>(fields.size()) != ds.d) {
        throw std::runtime_error("features.tsv row " + std::to_string(i) + ": expected " +
                                 std::to_string(ds.d) + " columns, got " +
                                 std::to_string(fields.size()));
      }
      for (int j = 0; j < ds.d; ++j) ds.features(i, j) = parse_double(fields[j]);
    }
    if (std::getline(in, line) && !line.empty()) {
      throw std::runtime_error("features.tsv: more rows than meta.json n");
    }
  }

  {
    auto in = open_or_throw(dir / "labels.tsv");
    ds.labels.resize(ds.n);
    std::string line;
    for (int i = 0; i < ds.n; ++i) {
      if (!std::getline(in, line)) {
        throw std::runtime_error("labels.tsv: expected " + std::to_string(ds.n) + " rows");
      }
      long y = parse_long(line);
      if (y < 0 || y >= ds.C) {
        throw std::runtime_error("labels.tsv row " + std::to_string(i) + ": label " +
                                 std::to_string(y) + " outside [0, " + std::to_string(ds.C) + ")");
      }
      ds.labels[i] = static_cast<int>(y);
    }
  }

  {
    auto in = open_or_throw(dir / "edges.tsv");
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      if (line.empty()) continue;
      std::istringstream ls(line);
      long s = -1, t = -1;
      if (!(ls >> s >> t)) {
        throw std::runtime_error("edges.tsv line " + std::to_string(lineno) + ": malformed");
      }
      if (s < 0 || s >= ds.n || t < 0 || t >= ds.n) {
        throw std::runtime_error("edges.tsv line " + std::to_string(lineno) + ": endpoint (" +
                                 std::to_string(s) + ", " + std::to_string(t) +
                                 ") outside [0, " + std::to_string(ds.n) + ")");
      }
      ds.edges.emplace_back(static_cast<int>(s), static_cast<int>(t));
    }
  }

  canonicalize_edges(ds);
  validate(ds);
  return ds;
}

void write_dataset(const Dataset& ds, const std::filesystem::path& dir) {
  validate(ds);
  std::filesystem::create_directories(dir);

  {
    json meta;
    meta["name"] = ds.name;
    meta["n"] = ds.n;
    meta["d"] = ds.d;
    meta["C"] = ds.C;
    meta["directed"] = ds.directed;
    std::ofstream out(dir / "meta.json");
    out << meta.dump(2) << "\n";
  }
  {
    std::ofstream out(dir / "features.tsv");
    for (int i = 0; i < ds.n; ++i) {
      for (int j = 0; j < ds.d; ++j) {
        if (j) out << '\t';
        out << format_double17(ds.features(i, j));
      }
      out << '\n';
    }
  }
  {
    std::ofstream out(dir / "labels.tsv");
    for (int i = 0; i < ds.n; ++i) out << ds.labels[i] << '\n';
  }
  {
    std::ofstream out(dir / "edges.tsv");
    for (const auto& [s, t] : ds.edges) out << s << '\t' << t << '\n';
  }
}

Dataset generate_sbm(const SbmConfig& cfg) {
  if (cfg.block_sizes.empty()) throw std::runtime_error("sbm: no blocks");
  for (int b : cfg.block_sizes) {
    if (b <= 0) throw std::runtime_error("sbm: non-positive block size");
  }
  if (!(cfg.inter_q >= 0.0 && cfg.inter_q <= cfg.intra_p && cfg.intra_p <= 1.0)) {
    throw std::runtime_error("sbm: need 0 <= inter_q <= intra_p <= 1");
  }
  if (cfg.feature_dim < 1) throw std::runtime_error("sbm: feature_dim must be >= 1");

  Dataset ds;
  ds.name = "sbm";
  ds.C = static_cast<int>(cfg.block_sizes.size());
  ds.d = cfg.feature_dim;
  ds.directed = false;

  int n = 0;
  for (int b : cfg.block_sizes) n += b;
  ds.n = n;

  ds.labels.resize(n);
  {
    int node = 0;
    for (int b = 0; b < ds.C; ++b) {
      for (int k = 0; k < cfg.block_sizes[b]; ++k) ds.labels[node++] = b;
    }
  }

  // Draw order is fixed: all pairs (i<j) lexicographically, then features row
  // by row. One uniform per pair regardless of probability.
  Rng rng(cfg.seed);
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      double p = ds.labels[i] == ds.labels[j] ? cfg.intra_p : cfg.inter_q;
      if (uniform01(rng) < p) ds.edges.emplace_back(i, j);
    }
  }

  ds.features.resize(n, ds.d);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < ds.d; ++j) ds.features(i, j) = normal01(rng);
    if (cfg.feature_mode == SbmFeatureMode::BlockMeans) {
      ds.features(i, ds.labels[i] % ds.d) += 3.0;  // separated block means
    }
  }

  validate(ds);
  return ds;
}

DatasetSummary summary(const Dataset& ds) {
  return {ds.n, static_cast<long>(ds.edges.size()), ds.d, ds.C};
}

void validate(const Dataset& ds) {
  if (ds.n <= 0 || ds.d <= 0 || ds.C <= 0) {
    throw std::runtime_error("dataset: non-positive dimensions");
  }
  if (ds.features.rows() != ds.n || ds.features.cols() != ds.d) {
    throw std::runtime_error("dataset: feature matrix shape mismatch");
  }
  if (ds.labels.size() != ds.n) throw std::runtime_error("dataset: label vector length mismatch");
  for (int i = 0; i < ds.n; ++i) {
    if (ds.labels[i] < 0 || ds.labels[i] >= ds.C) {
      throw std::runtime_error("dataset: label out of range at node " + std::to_string(i));
    }
  }
  if (!ds.features.allFinite()) throw std::runtime_error("dataset: non-finite feature");
  for (std::size_t k = 0; k < ds.edges.size(); ++k) {
    auto [s, t] = ds.edges[k];
    if (s < 0 || s >= ds.n || t < 0 || t >= ds.n) {
      throw std::runtime_error("dataset: edge endpoint out of range");
    }
    if (!ds.directed && s > t) throw std::runtime_error("dataset: non-canonical undirected edge");
    if (k > 0 && !(ds.edges[k - 1] < ds.edges[k])) {
      throw std::runtime_error("dataset: edges not sorted/unique");
    }
  }
}

std::optional<DatasetSummary> known_benchmark_stats(const std::string& name) {
  static const std::unordered_map<std::string, DatasetSummary> table = {
      {"cora", {2708, 5429, 1433, 7}},      {"citeseer", {3327, 4732, 3703, 6}},
      {"pubmed", {19717, 44338, 500, 3}},   {"chameleon", {2277, 36101, 2325, 5}},
      {"squirrel", {5201, 217073, 2089, 5}}, {"actor", {7600, 33544, 931, 5}},
      {"cornell", {183, 295, 1703, 5}},     {"texas", {183, 309, 1703, 5}},
      {"wisconsin", {251, 499, 1703, 5}},
  };
  std::string key;
  key.reserve(name.size());
  for (char c : name) key.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
  auto it = table.find(key);
  if (it == table.end()) return std::nullopt;
  return it->second;
}

Eigen::MatrixXd row_normalize(const Eigen::MatrixXd& X) {
  Eigen::MatrixXd Y = X;
  for (Eigen::Index i = 0; i < Y.rows(); ++i) {
    double s = Y.row(i).array().abs().sum();
    if (s > 0.0) Y.row(i) /= s;
  }
  return Y;
}

}  // namespace specfilter
