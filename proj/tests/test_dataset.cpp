#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <fstream>

#include "oracles.hpp"
#include "specfilter/dataset.hpp"

using namespace specfilter;

namespace {

Dataset tiny_dataset() {
  Dataset ds;
  ds.name = "tiny";
  ds.n = 4;
  ds.d = 2;
  ds.C = 2;
  ds.directed = false;
  ds.features.resize(4, 2);
  ds.features << 0.25, -1.5, 3.0, 0.1, 1.0 / 3.0, 2.0, -0.75, 1e-7;
  ds.labels.resize(4);
  ds.labels << 0, 0, 1, 1;
  ds.edges = {{0, 1}, {1, 2}, {2, 3}};
  return ds;
}

void write_raw(const std::filesystem::path& dir, const std::string& meta,
               const std::string& features, const std::string& labels, const std::string& edges) {
  std::filesystem::create_directories(dir);
  std::ofstream(dir / "meta.json") << meta;
  std::ofstream(dir / "features.tsv") << features;
  std::ofstream(dir / "labels.tsv") << labels;
  std::ofstream(dir / "edges.tsv") << edges;
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  return std::string(std::istreambuf_iterator<char>(in), {});
}

}  // namespace

TEST_CASE("write/load round trip is byte-identical under canonical ordering") {
  oracles::TempDir tmp("dataset_rt");
  Dataset ds = tiny_dataset();
  write_dataset(ds, tmp.path / "a");
  Dataset loaded = load_dataset(tmp.path / "a");
  CHECK(loaded.n == ds.n);
  CHECK(loaded.d == ds.d);
  CHECK(loaded.C == ds.C);
  CHECK(loaded.directed == ds.directed);
  CHECK(loaded.features == ds.features);
  CHECK(loaded.labels == ds.labels);
  CHECK(loaded.edges == ds.edges);

  write_dataset(loaded, tmp.path / "b");
  for (const char* f : {"meta.json", "features.tsv", "labels.tsv", "edges.tsv"}) {
    CHECK(slurp(tmp.path / "a" / f) == slurp(tmp.path / "b" / f));
  }
}

TEST_CASE("undirected edges are symmetrized and deduplicated at load") {
  oracles::TempDir tmp("dataset_canon");
  write_raw(tmp.path, R"({"name":"t","n":3,"d":1,"C":1,"directed":false})", "0\n0\n0\n",
            "0\n0\n0\n", "2\t0\n0\t2\n1\t0\n");
  Dataset ds = load_dataset(tmp.path);
  CHECK(ds.edges == std::vector<std::pair<int, int>>{{0, 1}, {0, 2}});
}

TEST_CASE("empty edge file gives isolated nodes") {
  oracles::TempDir tmp("dataset_empty");
  write_raw(tmp.path, R"({"name":"t","n":3,"d":1,"C":1,"directed":false})", "1\n2\n3\n",
            "0\n0\n0\n", "");
  Dataset ds = load_dataset(tmp.path);
  CHECK(ds.n == 3);
  CHECK(ds.edges.empty());
  auto s = summary(ds);
  CHECK(s == DatasetSummary{3, 0, 1, 1});
}

TEST_CASE("loader rejects bad inputs") {
  oracles::TempDir tmp("dataset_bad");

  SUBCASE("out-of-range edge endpoint") {
    write_raw(tmp.path / "e", R"({"name":"t","n":3,"d":1,"C":1,"directed":false})", "0\n0\n0\n",
              "0\n0\n0\n", "5\t0\n");
    CHECK_THROWS_WITH_AS(load_dataset(tmp.path / "e"), doctest::Contains("outside"),
                         std::runtime_error);
  }
  SUBCASE("missing file") {
    std::filesystem::create_directories(tmp.path / "m");
    CHECK_THROWS_AS(load_dataset(tmp.path / "m"), std::runtime_error);
  }
  SUBCASE("feature dimension mismatch") {
    write_raw(tmp.path / "d", R"({"name":"t","n":3,"d":2,"C":1,"directed":false})", "0\n0\n0\n",
              "0\n0\n0\n", "");
    CHECK_THROWS_AS(load_dataset(tmp.path / "d"), std::runtime_error);
  }
  SUBCASE("row count mismatch") {
    write_raw(tmp.path / "r", R"({"name":"t","n":4,"d":1,"C":1,"directed":false})", "0\n0\n0\n",
              "0\n0\n0\n0\n", "");
    CHECK_THROWS_AS(load_dataset(tmp.path / "r"), std::runtime_error);
  }
  SUBCASE("label out of range") {
    write_raw(tmp.path / "l", R"({"name":"t","n":3,"d":1,"C":2,"directed":false})", "0\n0\n0\n",
              "0\n2\n0\n", "");
    CHECK_THROWS_AS(load_dataset(tmp.path / "l"), std::runtime_error);
  }
}

TEST_CASE("directed edges are stored as given") {
  oracles::TempDir tmp("dataset_dir");
  write_raw(tmp.path, R"({"name":"t","n":3,"d":1,"C":1,"directed":true})", "0\n0\n0\n", "0\n0\n0\n",
            "2\t0\n0\t2\n");
  Dataset ds = load_dataset(tmp.path);
  CHECK(ds.edges == std::vector<std::pair<int, int>>{{0, 2}, {2, 0}});
  CHECK(summary(ds).edges == 2);
}

TEST_CASE("sbm with probability one and zero gives two disjoint cliques") {
  SbmConfig cfg;
  cfg.block_sizes = {50, 50};
  cfg.intra_p = 1.0;
  cfg.inter_q = 0.0;
  cfg.feature_dim = 2;
  Dataset ds = generate_sbm(cfg);
  CHECK(ds.n == 100);
  CHECK(ds.edges.size() == 2 * (50 * 49 / 2));
  for (auto [s, t] : ds.edges) CHECK(ds.labels[s] == ds.labels[t]);
  for (int i = 0; i < 50; ++i) CHECK(ds.labels[i] == 0);
  for (int i = 50; i < 100; ++i) CHECK(ds.labels[i] == 1);
}

TEST_CASE("sbm edge count matches the analytic expectation") {
  // blocks [100,100], p=0.5, q=0.05:
  //   E = 2 * C(100,2) * 0.5 + 100*100*0.05 = 5450
  //   Var = 9900*0.5*0.5 + 10000*0.05*0.95 = 2950
  SbmConfig cfg;
  cfg.block_sizes = {100, 100};
  cfg.intra_p = 0.5;
  cfg.inter_q = 0.05;
  cfg.feature_dim = 1;
  cfg.seed = 7;
  Dataset ds = generate_sbm(cfg);
  const double expected = 5450.0;
  const double sigma = std::sqrt(2950.0);
  CHECK(std::abs(double(ds.edges.size()) - expected) <= 4.0 * sigma);
}

TEST_CASE("sbm is deterministic for a fixed seed") {
  SbmConfig cfg;
  cfg.block_sizes = {30, 20};
  cfg.intra_p = 0.4;
  cfg.inter_q = 0.1;
  cfg.feature_dim = 3;
  cfg.seed = 123;
  Dataset a = generate_sbm(cfg);
  Dataset b = generate_sbm(cfg);
  CHECK(a.edges == b.edges);
  CHECK(a.features == b.features);
}

TEST_CASE("sbm with q=0 is block diagonal under block-sorted node order") {
  SbmConfig cfg;
  cfg.block_sizes = {10, 15, 5};
  cfg.intra_p = 0.7;
  cfg.inter_q = 0.0;
  cfg.seed = 5;
  Dataset ds = generate_sbm(cfg);
  for (auto [s, t] : ds.edges) CHECK(ds.labels[s] == ds.labels[t]);
}

TEST_CASE("sbm block-means features separate blocks") {
  SbmConfig cfg;
  cfg.block_sizes = {40, 40};
  cfg.intra_p = 0.2;
  cfg.inter_q = 0.05;
  cfg.feature_mode = SbmFeatureMode::BlockMeans;
  cfg.feature_dim = 2;
  cfg.seed = 11;
  Dataset ds = generate_sbm(cfg);
  double m0 = ds.features.block(0, 0, 40, 1).mean();
  double m1 = ds.features.block(40, 0, 40, 1).mean();
  CHECK(m0 > 2.0);  // shifted mean
  CHECK(std::abs(m1) < 1.0);
}

TEST_CASE("benchmark statistics table") {
  auto squirrel = known_benchmark_stats("Squirrel");
  REQUIRE(squirrel.has_value());
  CHECK(*squirrel == DatasetSummary{5201, 217073, 2089, 5});
  auto texas = known_benchmark_stats("texas");
  REQUIRE(texas.has_value());
  CHECK(*texas == DatasetSummary{183, 309, 1703, 5});
  CHECK(!known_benchmark_stats("not-a-benchmark").has_value());
}

TEST_CASE("validate flags structural violations") {
  Dataset ds = tiny_dataset();
  SUBCASE("non-canonical undirected edge") {
    ds.edges = {{1, 0}};
    CHECK_THROWS_AS(validate(ds), std::runtime_error);
  }
  SUBCASE("duplicate edge") {
    ds.edges = {{0, 1}, {0, 1}};
    CHECK_THROWS_AS(validate(ds), std::runtime_error);
  }
  SUBCASE("unsorted edges") {
    ds.edges = {{1, 2}, {0, 1}};
    CHECK_THROWS_AS(validate(ds), std::runtime_error);
  }
}

TEST_CASE("row_normalize scales rows to unit l1 norm") {
  Eigen::MatrixXd X(2, 3);
  X << 1.0, -1.0, 2.0, 0.0, 0.0, 0.0;
  Eigen::MatrixXd Y = row_normalize(X);
  CHECK(Y.row(0).array().abs().sum() == doctest::Approx(1.0));
  CHECK(Y.row(1) == X.row(1));  // zero row untouched
}
