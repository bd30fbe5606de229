#pragma once

#include <Eigen/Dense>
#include <string>

#include "specfilter/dataset.hpp"

namespace specfilter {

enum class ReprKind { Adjacency, Laplacian, NormAdjacency, NormLaplacian };

// CLI tags: adj | lap | nadj | nlap
std::string repr_tag(ReprKind kind);
ReprKind parse_repr(const std::string& tag);

struct GraphMatrix {
  Eigen::MatrixXd values;  // n x n
  bool symmetric = false;  // true iff source graph is undirected
  ReprKind kind = ReprKind::Adjacency;
};

// Builds the chosen matrix representation. Rows of the adjacency aggregate
// over in-edges (A[dst, src] = 1 for a directed edge), the degree matrix D is
// the diagonal of column sums, and the normalized variants use
// D^-1/2 A D^-1/2 with the convention 0^-1/2 := 0 for zero-degree nodes.
GraphMatrix build_representation(const Dataset& ds, ReprKind kind);

}  // namespace specfilter
