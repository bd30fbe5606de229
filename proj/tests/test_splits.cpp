#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <fstream>
#include <set>

#include "oracles.hpp"
#include "specfilter/splits.hpp"

using namespace specfilter;

namespace {

// Labels cycle through the classes; edges and features are irrelevant here.
Dataset labeled_dataset(int n, int C, const std::string& name = "synthetic") {
  Dataset ds;
  ds.name = name;
  ds.n = n;
  ds.d = 1;
  ds.C = C;
  ds.features = Eigen::MatrixXd::Zero(n, 1);
  ds.labels.resize(n);
  for (int i = 0; i < n; ++i) ds.labels(i) = i % C;
  return ds;
}

std::vector<int> class_sizes(const Dataset& ds) {
  std::vector<int> sizes(ds.C, 0);
  for (int i = 0; i < ds.n; ++i) sizes[ds.labels(i)]++;
  return sizes;
}

}  // namespace

TEST_CASE("sparse split counts match the historical convention") {
  Dataset ds = labeled_dataset(2800, 7, "cora-like");
  SplitSet s = make_sparse(ds, 0, true);
  CHECK(s.train.size() == 140);
  CHECK(s.test.size() == 1000);
  CHECK(s.val.size() == 500);

  // per-class training counts are exactly 20
  std::vector<int> per_class(7, 0);
  for (int i : s.train) per_class[ds.labels(i)]++;
  for (int c : per_class) CHECK(c == 20);

  SplitSet nv = make_sparse(ds, 0, false);
  CHECK(nv.val.empty());
  CHECK(nv.train.size() == 140);
}

TEST_CASE("sparse label rate on a pubmed-sized dataset") {
  Dataset ds = labeled_dataset(19717, 3, "pubmed-like");
  SplitSet s = make_sparse(ds, 1, true);
  CHECK(s.train.size() == 60);
  CHECK(double(s.train.size()) / ds.n == doctest::Approx(0.003).epsilon(0.02));
}

TEST_CASE("sparse split preconditions") {
  SUBCASE("class too small") {
    Dataset ds = labeled_dataset(1100, 2);
    ds.labels.setZero();
    for (int i = 0; i < 10; ++i) ds.labels(i) = 1;  // class 1 has 10 nodes
    CHECK_THROWS_AS(make_sparse(ds, 0, false), std::runtime_error);
  }
  SUBCASE("not enough nodes for the test pool") {
    Dataset ds = labeled_dataset(500, 2);
    CHECK_THROWS_AS(make_sparse(ds, 0, false), std::runtime_error);
  }
}

TEST_CASE("dense split slices by exact floors") {
  Dataset big = labeled_dataset(1000, 4);
  SplitSet s = make_dense(big, 0);
  CHECK(s.train.size() == 600);
  CHECK(s.val.size() == 200);
  CHECK(s.test.size() == 200);

  Dataset small = labeled_dataset(10, 2);
  SplitSet t = make_dense(small, 0);
  CHECK(t.train.size() == 6);
  CHECK(t.val.size() == 2);
  CHECK(t.test.size() == 2);

  SplitSet t2 = make_dense(small, 1);
  CHECK(t2.train.size() == 6);
  CHECK(t2.train != t.train);  // different shuffle
}

TEST_CASE("balanced split stratifies per class") {
  SUBCASE("one class of 100") {
    Dataset ds = labeled_dataset(100, 1);
    SplitSet s = make_balanced(ds, 0);
    CHECK(s.train.size() == 60);
    CHECK(s.val.size() == 20);
    CHECK(s.test.size() == 20);
  }
  SUBCASE("class of five goes 3/1/1") {
    Dataset ds = labeled_dataset(5, 1);
    SplitSet s = make_balanced(ds, 0);
    CHECK(s.train.size() == 3);
    CHECK(s.val.size() == 1);
    CHECK(s.test.size() == 1);
  }
  SUBCASE("per-class train counts equal floor(0.6 * class size) exactly") {
    Rng rng(55);
    for (int trial = 0; trial < 20; ++trial) {
      const int C = 1 + static_cast<int>(uniform_index(rng, 5));
      const int n = C * 5 + static_cast<int>(uniform_index(rng, 150));
      Dataset ds = labeled_dataset(n, C);
      auto sizes = class_sizes(ds);
      SplitSet s = make_balanced(ds, trial);
      std::vector<int> train_per_class(C, 0);
      for (int i : s.train) train_per_class[ds.labels(i)]++;
      for (int c = 0; c < C; ++c) CHECK(train_per_class[c] == 3 * sizes[c] / 5);
    }
  }
  SUBCASE("class too small") {
    Dataset ds = labeled_dataset(9, 2);  // one class has 4 nodes
    CHECK_THROWS_AS(make_balanced(ds, 0), std::runtime_error);
  }
}

TEST_CASE("splits are disjoint, in-range and deterministic over random datasets") {
  Rng rng(7);
  for (int trial = 0; trial < 200; ++trial) {
    const int C = 1 + static_cast<int>(uniform_index(rng, 5));
    const int n = C * 5 + static_cast<int>(uniform_index(rng, 180));
    Dataset ds = labeled_dataset(n, C);
    const std::uint64_t seed = rng();

    for (SplitKind kind : {SplitKind::Dense, SplitKind::Balanced}) {
      SplitSet s = make_split(ds, kind, seed);
      validate_split(s, ds.n, false);  // throws on violation
      CHECK(s.train.size() + s.val.size() + s.test.size() == static_cast<std::size_t>(ds.n));

      SplitSet again = make_split(ds, kind, seed);
      CHECK(s.train == again.train);
      CHECK(s.val == again.val);
      CHECK(s.test == again.test);
    }
  }
}

TEST_CASE("public convention is sparse-with-validation at seed zero") {
  Dataset ds = labeled_dataset(2800, 7);
  SplitSet pub = make_split(ds, SplitKind::Public, 12345);  // seed argument ignored
  SplitSet ref = make_sparse(ds, 0, true);
  CHECK(pub.train == ref.train);
  CHECK(pub.val == ref.val);
  CHECK(pub.test == ref.test);
  CHECK(pub.kind == SplitKind::Public);
}

TEST_CASE("split persistence round trips and validates the target") {
  oracles::TempDir tmp("splits");
  Dataset ds = labeled_dataset(60, 3, "trip");
  auto splits = make_splits(ds, SplitKind::Balanced);
  CHECK(splits.size() == 10);
  for (std::size_t k = 0; k < splits.size(); ++k) CHECK(splits[k].seed == k);

  save_splits(splits, ds.name, tmp.path / "s.json");
  auto back = load_splits(tmp.path / "s.json", ds);
  REQUIRE(back.size() == splits.size());
  for (std::size_t k = 0; k < splits.size(); ++k) {
    CHECK(back[k].train == splits[k].train);
    CHECK(back[k].val == splits[k].val);
    CHECK(back[k].test == splits[k].test);
    CHECK(back[k].seed == splits[k].seed);
  }

  SUBCASE("wrong dataset is rejected") {
    Dataset other = labeled_dataset(60, 3, "someone-else");
    CHECK_THROWS_AS(load_splits(tmp.path / "s.json", other), std::runtime_error);
  }
  SUBCASE("out-of-range index is rejected") {
    std::ofstream(tmp.path / "bad.json")
        << R"({"dataset":"trip","kind":"dense","seeds":[{"seed":0,"train":[1000000],"val":[1],"test":[2]}]})";
    CHECK_THROWS_WITH_AS(load_splits(tmp.path / "bad.json", ds), doctest::Contains("out of range"),
                         std::runtime_error);
  }
}

TEST_CASE("external mask files load and are checked for overlap") {
  oracles::TempDir tmp("masks");
  Dataset ds = labeled_dataset(30, 2);
  std::ofstream(tmp.path / "train.txt") << "0\n1\n2\n";
  std::ofstream(tmp.path / "val.txt") << "3\n4\n";
  std::ofstream(tmp.path / "test.txt") << "5\n6\n7\n";
  SplitSet s = load_external_masks(tmp.path / "train.txt", tmp.path / "val.txt",
                                   tmp.path / "test.txt", ds);
  CHECK(s.train == std::vector<int>{0, 1, 2});
  CHECK(s.val == std::vector<int>{3, 4});
  CHECK(s.test == std::vector<int>{5, 6, 7});

  std::ofstream(tmp.path / "overlap.txt") << "2\n9\n";
  CHECK_THROWS_AS(load_external_masks(tmp.path / "train.txt", tmp.path / "overlap.txt",
                                      tmp.path / "test.txt", ds),
                  std::runtime_error);
}

TEST_CASE("split tags round trip") {
  for (SplitKind kind :
       {SplitKind::Sparse, SplitKind::Public, SplitKind::Dense, SplitKind::Balanced}) {
    CHECK(parse_split(split_tag(kind)) == kind);
  }
  CHECK_THROWS_AS(parse_split("nope"), std::runtime_error);
}
