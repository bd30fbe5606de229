#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace specfilter {

// A node-classification benchmark graph. Undirected edges are canonicalized
// to a single (min,max) pair; directed edges are stored as given. Edge lists
// are sorted and duplicate-free after loading or generation.
struct Dataset {
  std::string name;
  int n = 0;  // nodes
  int d = 0;  // feature dimension
  int C = 0;  // classes
  bool directed = false;
  Eigen::MatrixXd features;                // n x d
  Eigen::VectorXi labels;                  // n, entries in [0, C)
  std::vector<std::pair<int, int>> edges;  // 0-indexed (src, dst)
};

enum class SbmFeatureMode { Noise, BlockMeans };

struct SbmConfig {
  std::vector<int> block_sizes;
  double intra_p = 0.5;
  double inter_q = 0.1;
  SbmFeatureMode feature_mode = SbmFeatureMode::Noise;
  int feature_dim = 8;
  std::uint64_t seed = 0;
};

struct DatasetSummary {
  long nodes = 0;
  long edges = 0;  // undirected pairs counted once
  long features = 0;
  long classes = 0;
  bool operator==(const DatasetSummary&) const = default;
};

// Reads meta.json, features.tsv, labels.tsv, edges.tsv from `dir`.
// Undirected graphs are symmetrized (canonicalized) at load.
Dataset load_dataset(const std::filesystem::path& dir);

// Inverse of load_dataset under canonical ordering; creates `dir` if needed.
void write_dataset(const Dataset& ds, const std::filesystem::path& dir);

// Stochastic block model sampler. Labels equal block membership; each
// unordered pair is drawn independently (intra_p within a block, inter_q
// across). Deterministic for a fixed seed.
Dataset generate_sbm(const SbmConfig& cfg);

DatasetSummary summary(const Dataset& ds);

// Structural checks: index ranges, canonical edge order, no duplicates.
// Throws std::runtime_error on violation.
void validate(const Dataset& ds);

// Published statistics for the nine benchmark networks, keyed by lowercase
// name. Empty for anything else.
std::optional<DatasetSummary> known_benchmark_stats(const std::string& name);

// L1-normalizes each feature row; rows summing to zero pass through.
Eigen::MatrixXd row_normalize(const Eigen::MatrixXd& X);

}  // namespace specfilter
