#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <Eigen/Eigenvalues>

#include "oracles.hpp"
#include "specfilter/representation.hpp"

using namespace specfilter;

namespace {

Dataset path_graph() {
  Dataset ds;
  ds.name = "path2";
  ds.n = 2;
  ds.d = 1;
  ds.C = 1;
  ds.features = Eigen::MatrixXd::Zero(2, 1);
  ds.labels = Eigen::VectorXi::Zero(2);
  ds.edges = {{0, 1}};
  return ds;
}

}  // namespace

TEST_CASE("hand-computed representations of the two-node path") {
  Dataset ds = path_graph();

  Eigen::MatrixXd A(2, 2), L(2, 2);
  A << 0, 1, 1, 0;
  L << 1, -1, -1, 1;

  CHECK(build_representation(ds, ReprKind::Adjacency).values == A);
  CHECK(build_representation(ds, ReprKind::Laplacian).values == L);
  // unit degrees: normalization is a no-op
  CHECK(build_representation(ds, ReprKind::NormAdjacency).values == A);
  CHECK(build_representation(ds, ReprKind::NormLaplacian).values == L);
  CHECK(build_representation(ds, ReprKind::Adjacency).symmetric);
}

TEST_CASE("isolated node uses the zero-degree convention") {
  Dataset ds;
  ds.name = "one";
  ds.n = 1;
  ds.d = 1;
  ds.C = 1;
  ds.features = Eigen::MatrixXd::Zero(1, 1);
  ds.labels = Eigen::VectorXi::Zero(1);

  CHECK(build_representation(ds, ReprKind::NormAdjacency).values(0, 0) == 0.0);
  CHECK(build_representation(ds, ReprKind::NormLaplacian).values(0, 0) == 1.0);
}

TEST_CASE("directed adjacency aggregates over in-edges") {
  Dataset ds;
  ds.name = "dir";
  ds.n = 3;
  ds.d = 1;
  ds.C = 1;
  ds.directed = true;
  ds.features = Eigen::MatrixXd::Zero(3, 1);
  ds.labels = Eigen::VectorXi::Zero(3);
  ds.edges = {{0, 1}, {0, 2}, {2, 1}};  // (src, dst)

  GraphMatrix A = build_representation(ds, ReprKind::Adjacency);
  CHECK(A.values(1, 0) == 1.0);  // row = dst, column = src
  CHECK(A.values(2, 0) == 1.0);
  CHECK(A.values(1, 2) == 1.0);
  CHECK(A.values.sum() == 3.0);
  CHECK(!A.symmetric);

  // degree = column sums = out-degrees under this orientation
  GraphMatrix L = build_representation(ds, ReprKind::Laplacian);
  CHECK(L.values(0, 0) == 2.0);
  CHECK(L.values(1, 1) == 0.0);
  CHECK(L.values(2, 2) == 1.0);
}

TEST_CASE("structural properties over random undirected graphs") {
  for (std::uint64_t seed : {1u, 2u, 3u}) {
    SbmConfig cfg;
    cfg.block_sizes = {15, 10, 8};
    cfg.intra_p = 0.5;
    cfg.inter_q = 0.15;
    cfg.feature_dim = 2;
    cfg.seed = seed;
    Dataset ds = generate_sbm(cfg);

    for (ReprKind kind : {ReprKind::Adjacency, ReprKind::Laplacian, ReprKind::NormAdjacency,
                          ReprKind::NormLaplacian}) {
      GraphMatrix M = build_representation(ds, kind);
      CHECK(M.symmetric);
      CHECK((M.values - M.values.transpose()).cwiseAbs().maxCoeff() == 0.0);
      CHECK(M.values.allFinite());
    }

    GraphMatrix L = build_representation(ds, ReprKind::Laplacian);
    CHECK(L.values.rowwise().sum().cwiseAbs().maxCoeff() == 0.0);

    GraphMatrix NL = build_representation(ds, ReprKind::NormLaplacian);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(NL.values);
    CHECK(es.eigenvalues().minCoeff() >= -1e-8);
    CHECK(es.eigenvalues().maxCoeff() <= 2.0 + 1e-8);
  }
}

TEST_CASE("repr tags round trip") {
  for (ReprKind kind : {ReprKind::Adjacency, ReprKind::Laplacian, ReprKind::NormAdjacency,
                        ReprKind::NormLaplacian}) {
    CHECK(parse_repr(repr_tag(kind)) == kind);
  }
  CHECK_THROWS_AS(parse_repr("bogus"), std::runtime_error);
}
