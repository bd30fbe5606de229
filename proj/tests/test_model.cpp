#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "oracles.hpp"
#include "specfilter/model.hpp"
#include "specfilter/representation.hpp"
#include "specfilter/training.hpp"

using namespace specfilter;

namespace {

struct Fixture {
  Eigen::MatrixXd X;
  Eigen::MatrixXd P;
  SpectralSystem sys;
  KernelMatrix K;
  Eigen::VectorXi labels;
  std::vector<int> mask;
  int n, d, C;
};

// Random instance with a symmetric or asymmetric propagation source.
Fixture make_fixture(int n, int d, int C, int rank, KernelSpec spec, bool symmetric,
                     std::uint64_t seed) {
  Rng rng(seed);
  Fixture f;
  f.n = n;
  f.d = d;
  f.C = C;
  f.X = oracles::random_matrix(n, d, rng);
  Eigen::MatrixXd M =
      symmetric ? oracles::random_symmetric(n, rng) : oracles::random_matrix(n, n, rng);
  f.P = M;
  GraphMatrix g;
  g.values = M;
  g.symmetric = symmetric;
  f.sys = decompose(g);
  // +0.5 keeps floor(factor * n) == n - rank despite rounding
  if (rank < n) f.sys = truncate(f.sys, (double(n - rank) + 0.5) / double(n));
  f.K = kernel_matrix(spec, f.sys.values);
  f.labels.resize(n);
  for (int i = 0; i < n; ++i) f.labels(i) = static_cast<int>(uniform_index(rng, C));
  for (int i = 0; i < n; i += 2) f.mask.push_back(i);
  return f;
}

ForwardContext kernel_ctx(const Fixture& f, double beta = 0.0) {
  ForwardContext ctx;
  ctx.X = &f.X;
  ctx.sys = &f.sys;
  ctx.K = &f.K;
  ctx.beta = beta;
  return ctx;
}

}  // namespace

TEST_CASE("alpha zero with beta one degenerates to the linear model") {
  Fixture f = make_fixture(12, 5, 3, 12, {KernelKind::GaussianRbf, 1.0}, true, 1);
  ModelParams p = init_params(ModelKind::Kernel, f.d, f.C, 0, &f.K, 0);
  p.alpha.setZero();
  ForwardContext ctx = kernel_ctx(f, 1.0);
  Eigen::MatrixXd got = forward(ModelKind::Kernel, p, ctx);
  CHECK(oracles::rel_error(got, f.X * p.W) <= 1e-12);
}

TEST_CASE("factored forward matches the materialized operator") {
  for (bool symmetric : {true, false}) {
    for (KernelSpec spec : {KernelSpec{KernelKind::Identity, {}},
                            KernelSpec{KernelKind::Linear, {}},
                            KernelSpec{KernelKind::SobolevUnbounded, 0.5}}) {
      Fixture f = make_fixture(20, 6, 3, 14, spec, symmetric, 33);
      ModelParams p = init_params(ModelKind::LrKernel, f.d, f.C, 0, &f.K, 5);
      const double beta = 0.25;
      ForwardContext ctx = kernel_ctx(f, beta);
      Eigen::MatrixXd fast = forward(ModelKind::LrKernel, p, ctx);

      Eigen::MatrixXd dense = regularize(build_propagation(f.sys, f.K, p.alpha), beta);
      CHECK(oracles::rel_error(fast, dense * f.X * p.W) <= 1e-8);
    }
  }
}

TEST_CASE("propagated linear logits are block-constant on disjoint cliques") {
  SbmConfig cfg;
  cfg.block_sizes = {50, 50};
  cfg.intra_p = 1.0;
  cfg.inter_q = 0.0;
  cfg.feature_dim = 2;
  cfg.seed = 3;
  Dataset ds = generate_sbm(cfg);
  // one-hot block features
  ds.features = Eigen::MatrixXd::Zero(100, 2);
  for (int i = 0; i < 100; ++i) ds.features(i, ds.labels(i)) = 1.0;

  GraphMatrix A = build_representation(ds, ReprKind::Adjacency);
  ModelParams p;
  p.W = Eigen::MatrixXd::Identity(2, 2);
  ForwardContext ctx;
  ctx.X = &ds.features;
  ctx.P = &A.values;
  Eigen::MatrixXd logits = forward(ModelKind::PropLinear, p, ctx);
  for (int i = 1; i < 50; ++i) {
    CHECK(logits.row(i) == logits.row(0));
    CHECK(logits.row(50 + i) == logits.row(50));
  }
  CHECK(logits(0, 0) == 49.0);  // 49 same-block neighbors
  CHECK(logits(0, 1) == 0.0);
}

TEST_CASE("analytic gradients match central finite differences") {
  // n=15, d=7, C=3, rank in {3, 15}, ten seeds per model kind
  const double tol = 1e-4;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const int rank = seed % 2 == 0 ? 3 : 15;
    Fixture f = make_fixture(15, 7, 3, rank, {KernelKind::GaussianRbf, 0.8},
                             seed % 3 != 0, 100 + seed);

    for (ModelKind kind : {ModelKind::Linear, ModelKind::PropLinear, ModelKind::Kernel,
                           ModelKind::LrKernel, ModelKind::Mlp2}) {
      ForwardContext ctx;
      ctx.X = &f.X;
      if (kind == ModelKind::PropLinear) ctx.P = &f.P;
      if (kind == ModelKind::Kernel || kind == ModelKind::LrKernel) {
        ctx = kernel_ctx(f, seed % 2 == 0 ? 0.3 : 0.0);
      }
      ModelParams p = init_params(kind, f.d, f.C, 4, &f.K, seed);

      auto loss_of = [&] {
        return cross_entropy(forward(kind, p, ctx), f.labels, f.mask).first;
      };
      auto [loss, G] = cross_entropy(forward(kind, p, ctx), f.labels, f.mask);
      ModelParams g = backward(kind, p, ctx, G);

      auto check_grad = [&](Eigen::MatrixXd& theta, const Eigen::MatrixXd& analytic) {
        Eigen::MatrixXd fd = oracles::finite_diff(theta, loss_of);
        for (Eigen::Index k = 0; k < theta.size(); ++k) {
          CHECK(oracles::rel_close(analytic.data()[k], fd.data()[k], tol, 1e-6));
        }
      };
      if (kind == ModelKind::Mlp2) {
        check_grad(p.W1, g.W1);
        check_grad(p.W2, g.W2);
        Eigen::MatrixXd b1 = p.b1, b2 = p.b2;
        Eigen::MatrixXd fb1 = oracles::finite_diff(b1, [&] {
          p.b1 = b1.col(0);
          return loss_of();
        });
        p.b1 = b1.col(0);
        Eigen::MatrixXd fb2 = oracles::finite_diff(b2, [&] {
          p.b2 = b2.col(0);
          return loss_of();
        });
        p.b2 = b2.col(0);
        for (Eigen::Index k = 0; k < fb1.size(); ++k) {
          CHECK(oracles::rel_close(g.b1(k), fb1(k, 0), tol, 1e-6));
        }
        for (Eigen::Index k = 0; k < fb2.size(); ++k) {
          CHECK(oracles::rel_close(g.b2(k), fb2(k, 0), tol, 1e-6));
        }
      } else {
        check_grad(p.W, g.W);
        if (kind == ModelKind::Kernel || kind == ModelKind::LrKernel) {
          Eigen::MatrixXd alpha = p.alpha;
          Eigen::MatrixXd fa = oracles::finite_diff(alpha, [&] {
            p.alpha = alpha.col(0);
            return loss_of();
          });
          p.alpha = alpha.col(0);
          for (Eigen::Index k = 0; k < fa.size(); ++k) {
            CHECK(oracles::rel_close(g.alpha(k), fa(k, 0), tol, 1e-6));
          }
        }
      }
    }
  }
}

TEST_CASE("zero upstream gradient gives zero parameter gradients") {
  Fixture f = make_fixture(10, 4, 2, 10, {KernelKind::Linear, {}}, true, 8);
  ForwardContext ctx = kernel_ctx(f);
  ModelParams p = init_params(ModelKind::Kernel, f.d, f.C, 0, &f.K, 1);
  ModelParams g = backward(ModelKind::Kernel, p, ctx, Eigen::MatrixXd::Zero(f.n, f.C));
  CHECK(g.W == Eigen::MatrixXd::Zero(f.d, f.C));
  CHECK(g.alpha == Eigen::VectorXd::Zero(f.sys.r));
}

TEST_CASE("rank-1 identity-kernel alpha gradient expands by hand") {
  Fixture f = make_fixture(9, 4, 2, 1, {KernelKind::Identity, {}}, false, 55);
  ForwardContext ctx = kernel_ctx(f);
  ModelParams p = init_params(ModelKind::LrKernel, f.d, f.C, 0, &f.K, 2);
  Rng rng(99);
  Eigen::MatrixXd G = oracles::random_matrix(f.n, f.C, rng);
  ModelParams g = backward(ModelKind::LrKernel, p, ctx, G);

  // dL/dalpha_1 = <u_1, G rows> dotted with <v_1, X W rows>
  Eigen::VectorXd u1 = f.sys.U.col(0), v1 = f.sys.right().col(0);
  Eigen::RowVectorXd a = u1.transpose() * G;
  Eigen::RowVectorXd b = v1.transpose() * (f.X * p.W);
  CHECK(g.alpha.size() == 1);
  CHECK(g.alpha(0) == doctest::Approx(a.dot(b)).epsilon(1e-10));
}

TEST_CASE("initialization contracts") {
  Fixture f = make_fixture(11, 6, 3, 8, {KernelKind::Identity, {}}, true, 4);

  SUBCASE("identity kernel starts exactly at the retained spectrum") {
    ModelParams p = init_params(ModelKind::LrKernel, f.d, f.C, 0, &f.K, 9);
    CHECK(filter_values(f.K, p.alpha) == f.sys.values);
  }
  SUBCASE("same seed, same parameters") {
    ModelParams a = init_params(ModelKind::Mlp2, 6, 3, 16, nullptr, 42);
    ModelParams b = init_params(ModelKind::Mlp2, 6, 3, 16, nullptr, 42);
    CHECK(a.W1 == b.W1);
    CHECK(a.W2 == b.W2);
    ModelParams c = init_params(ModelKind::Mlp2, 6, 3, 16, nullptr, 43);
    CHECK(a.W1 != c.W1);
  }
  SUBCASE("weights respect the fan-in bound") {
    ModelParams p = init_params(ModelKind::Linear, 25, 4, 0, nullptr, 7);
    CHECK(p.W.cwiseAbs().maxCoeff() <= 1.0 / 5.0);
  }
  SUBCASE("ridge solution beats the zero vector") {
    Fixture fr = make_fixture(11, 6, 3, 8, {KernelKind::GaussianRbf, 1.0}, true, 4);
    ModelParams p = init_params(ModelKind::LrKernel, fr.d, fr.C, 0, &fr.K, 9);
    double resid = (filter_values(fr.K, p.alpha) - fr.sys.values).norm();
    CHECK(resid <= fr.sys.values.norm());
  }
}

TEST_CASE("matrix sensing identity reproduces the scalar forward pass") {
  for (std::uint64_t seed : {0u, 1u, 2u}) {
    Fixture f = make_fixture(10, 5, 1, 7, {KernelKind::GaussianRbf, 0.6}, seed != 1, 200 + seed);
    ModelParams p = init_params(ModelKind::LrKernel, f.d, 1, 0, &f.K, seed);
    ForwardContext ctx = kernel_ctx(f);
    Eigen::MatrixXd logits = forward(ModelKind::LrKernel, p, ctx);
    Eigen::VectorXd beta_vec = p.W.col(0);
    for (int j = 0; j < f.n; ++j) {
      double s = sensing_form(f.sys, f.K, p.alpha, beta_vec, f.X, j);
      CHECK(std::abs(s - logits(j, 0)) <= 1e-10 * std::max(1.0, std::abs(logits(j, 0))));
    }

    // alpha = 0 annihilates every measurement
    CHECK(sensing_form(f.sys, f.K, Eigen::VectorXd::Zero(f.sys.r), beta_vec, f.X, 0) == 0.0);
  }
}

TEST_CASE("rank-1 sensing reduces to a product of two scalars") {
  Fixture f = make_fixture(8, 4, 1, 1, {KernelKind::Linear, {}}, true, 77);
  Rng rng(5);
  Eigen::VectorXd alpha(1), beta_vec(4);
  alpha << normal01(rng);
  for (int i = 0; i < 4; ++i) beta_vec(i) = normal01(rng);
  for (int j = 0; j < f.n; ++j) {
    double expect = (f.sys.U(j, 0) * f.K.K(0, 0) * alpha(0)) *
                    (f.X.transpose() * f.sys.right().col(0)).dot(beta_vec);
    CHECK(sensing_form(f.sys, f.K, alpha, beta_vec, f.X, j) ==
          doctest::Approx(expect).epsilon(1e-12));
  }
}

TEST_CASE("model equivalence chain at full rank") {
  Fixture f = make_fixture(16, 5, 3, 16, {KernelKind::Identity, {}}, true, 10);

  // lr_kernel at factor 0 vs kernel: same context, same params
  ModelParams p = init_params(ModelKind::Kernel, f.d, f.C, 0, &f.K, 3);
  ForwardContext ctx = kernel_ctx(f);
  Eigen::MatrixXd a = forward(ModelKind::LrKernel, p, ctx);
  Eigen::MatrixXd b = forward(ModelKind::Kernel, p, ctx);
  CHECK(a == b);

  // identity kernel with alpha frozen at the spectrum vs propagated linear
  ForwardContext pctx;
  pctx.X = &f.X;
  pctx.P = &f.P;
  Eigen::MatrixXd c = forward(ModelKind::PropLinear, p, pctx);
  CHECK(oracles::rel_error(b, c) <= 1e-8);
}

TEST_CASE("factored forward never allocates an n x n temporary") {
  const int n = 300, d = 5, C = 2;
  Fixture f = make_fixture(n, d, C, n, {KernelKind::Identity, {}}, true, 64);
  ModelParams p = init_params(ModelKind::Kernel, d, C, 0, &f.K, 0);
  ForwardContext ctx = kernel_ctx(f, 0.1);

  forward_alloc_stats().reset();
  forward(ModelKind::Kernel, p, ctx);
  CHECK(forward_alloc_stats().temp_count > 0);
  CHECK(forward_alloc_stats().max_temp_elements <= std::size_t(n) * std::max(d, C));
  CHECK(forward_alloc_stats().max_temp_elements < std::size_t(n) * n);

  Rng rng(1);
  Eigen::MatrixXd G = oracles::random_matrix(n, C, rng);
  forward_alloc_stats().reset();
  backward(ModelKind::Kernel, p, ctx, G);
  CHECK(forward_alloc_stats().max_temp_elements <= std::size_t(n) * std::max(d, C));
  CHECK(forward_alloc_stats().max_temp_elements < std::size_t(n) * n);
}

TEST_CASE("shape mismatches are rejected") {
  Fixture f = make_fixture(8, 3, 2, 8, {KernelKind::Identity, {}}, true, 1);
  ModelParams p = init_params(ModelKind::Kernel, f.d, f.C, 0, &f.K, 0);
  p.alpha = Eigen::VectorXd::Zero(3);  // wrong rank
  ForwardContext ctx = kernel_ctx(f);
  CHECK_THROWS_AS(forward(ModelKind::Kernel, p, ctx), std::runtime_error);

  CHECK_THROWS_AS(sensing_form(f.sys, f.K, Eigen::VectorXd::Zero(f.sys.r),
                               Eigen::VectorXd::Zero(2), f.X, 0),
                  std::runtime_error);
}
