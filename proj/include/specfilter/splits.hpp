#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "specfilter/dataset.hpp"

namespace specfilter {

enum class SplitKind { Sparse, Public, Dense, Balanced };

// CLI tags: sparse | public | dense | balanced
std::string split_tag(SplitKind kind);
SplitKind parse_split(const std::string& tag);

// Disjoint train/val/test node index sets, each sorted ascending. val may be
// empty only for the sparse-without-validation variant.
struct SplitSet {
  std::vector<int> train, val, test;
  SplitKind kind = SplitKind::Balanced;
  std::uint64_t seed = 0;
};

// 20 nodes per class for training and 1000 test nodes from the remainder;
// with_val adds 500 validation nodes disjoint from both.
SplitSet make_sparse(const Dataset& ds, std::uint64_t seed, bool with_val);

// Uniform shuffle of all nodes: first 60% train (floor), next 20% val
// (floor), remainder test.
SplitSet make_dense(const Dataset& ds, std::uint64_t seed);

// Per-class 60/20/20 with the same floor rule, collected over classes.
SplitSet make_balanced(const Dataset& ds, std::uint64_t seed);

// Dispatcher. Public is sparse-with-validation pinned to seed 0 (the seed
// argument is ignored for that kind).
SplitSet make_split(const Dataset& ds, SplitKind kind, std::uint64_t seed);

// Default replication: seeds 0..count-1 (single seed 0 for sparse/public).
std::vector<SplitSet> make_splits(const Dataset& ds, SplitKind kind, int count = 10);

// JSON persistence:
// {"dataset":str,"kind":str,"seeds":[{"seed":int,"train":[...],"val":[...],"test":[...]}]}
void save_splits(const std::vector<SplitSet>& splits, const std::string& dataset_name,
                 const std::filesystem::path& path);
std::vector<SplitSet> load_splits(const std::filesystem::path& path, const Dataset& target);

// Externally provided masks, one node index per line per file. An empty val
// path yields an empty validation set.
SplitSet load_external_masks(const std::filesystem::path& train_path,
                             const std::filesystem::path& val_path,
                             const std::filesystem::path& test_path, const Dataset& target);

// Disjointness/range checks shared by every construction path.
void validate_split(const SplitSet& s, int n, bool allow_empty_val);

}  // namespace specfilter
