#pragma once

#include <Eigen/Dense>
#include <filesystem>

#include "specfilter/representation.hpp"

namespace specfilter {

// Ordered spectral system of a graph matrix: eigendecomposition for symmetric
// input (right vectors alias U), thin SVD otherwise. Columns are sorted by
// value magnitude, descending; magnitude ties break by descending signed
// value, then original solver index. Each column of U is sign-flipped (with
// its partner in V) so its largest-magnitude entry is nonnegative.
struct SpectralSystem {
  Eigen::MatrixXd U;       // n x r left vectors
  Eigen::MatrixXd V;       // n x r right vectors; empty when symmetric
  Eigen::VectorXd values;  // r, magnitude-descending
  Eigen::Index n = 0;      // ambient dimension (rows of the source matrix)
  Eigen::Index r = 0;      // retained rank
  bool symmetric = false;
  ReprKind source_kind = ReprKind::Adjacency;
  double truncation = 0.0;  // factor already applied

  const Eigen::MatrixXd& right() const { return symmetric ? U : V; }
};

// Full-rank decomposition. Throws on solver non-convergence.
SpectralSystem decompose(const GraphMatrix& M);

// Keeps the leading n - floor(factor * n) columns. factor must lie in [0, 1)
// and be at least the truncation already applied.
SpectralSystem truncate(const SpectralSystem& sys, double factor);

// U * diag(values) * right()^T.
Eigen::MatrixXd reconstruct(const SpectralSystem& sys);

// Binary cache. Layout: magic "SPECSYS1", little-endian u64 n, u64 r,
// u8 symmetric, row-major f64 values/U/V, u64 checksum of all payload bytes.
// source_kind and truncation are not part of the file; callers that need them
// encode them in the path (see harness cache naming).
void save_cache(const SpectralSystem& sys, const std::filesystem::path& path);
SpectralSystem load_cache(const std::filesystem::path& path);

}  // namespace specfilter
