#include <doctest.h>

#include "favar/simulate.hpp"
#include "favar/varlasso.hpp"
#include "oracles.hpp"

using namespace favar;

namespace {

// Small strictly positive definite Gram system from a random VAR(d) sample.
GramSystem random_system(int p, int d, unsigned seed, int n = 200) {
  return build_gram(oracle::random_matrix(n, p, seed), d);
}

}  // namespace

TEST_CASE("large lambda kills every coefficient") {
  const auto G = random_system(5, 2, 1);
  for (Index j = 0; j < 5; ++j) {
    const double kill = 2.0 * G.gamma.col(j).cwiseAbs().maxCoeff();
    CHECK(lasso_row(G, j, kill).isZero(0.0));
  }
  const auto fit = fit_var(G, lambda_max(G));
  CHECK(fit.nonzeros() == 0);
  CHECK(fit_var(G, 1e6).A.isZero(0.0));
}

TEST_CASE("lambda = 0 matches the dense solve") {
  for (unsigned seed = 0; seed < 10; ++seed) {
    const auto G = random_system(4, 2, seed);
    const Eigen::LLT<Matrix> llt(G.Gamma);
    for (Index j = 0; j < 4; ++j) {
      LassoOptions opts;
      opts.tol = 1e-12;
      const Vector beta = lasso_row(G, j, 0.0, opts);
      const Vector ref = llt.solve(G.gamma.col(j));
      CHECK((beta - ref).cwiseAbs().maxCoeff() <= 1e-6);
    }
  }
}

TEST_CASE("positive lambda matches a proximal-gradient reference") {
  const auto G = random_system(6, 2, 77);  // pd = 12
  const double lambda = 0.1;
  for (Index j = 0; j < 6; ++j) {
    LassoOptions opts;
    opts.tol = 1e-10;
    const Vector beta = lasso_row(G, j, lambda, opts);
    const Vector target = G.gamma.col(j);
    const Vector ref = oracle::fista(G.Gamma, target, lambda);
    CHECK(std::abs(oracle::objective(G.Gamma, target, beta, lambda) -
                   oracle::objective(G.Gamma, target, ref, lambda)) <= 1e-8);
    CHECK(kkt_gap(G.Gamma, target, beta, lambda) <= 10.0 * opts.tol);
  }
}

TEST_CASE("objective never increases across sweeps") {
  const auto G = random_system(8, 2, 5, 60);
  const Vector target = G.gamma.col(3);
  for (double lambda : {0.0, 0.01, 0.1, 0.5}) {
    double prev = 0.0;  // objective at beta = 0
    LassoOptions opts;
    opts.on_sweep = [&](long, const Vector& b) {
      const double obj = gram_objective(G.Gamma, target, b, lambda);
      CHECK(obj <= prev + 1e-12 * (1.0 + std::abs(prev)));
      prev = obj;
    };
    lasso_row(G, 3, lambda, opts);
  }
}

TEST_CASE("forward and backward sweeps agree") {
  for (unsigned seed = 0; seed < 10; ++seed) {
    const auto G = random_system(5, 1, 40 + seed);
    for (double lambda : {0.0, 0.05, 0.2}) {
      LassoOptions fwd, bwd;
      fwd.tol = bwd.tol = 1e-10;
      bwd.reverse_order = true;
      const Vector a = lasso_row(G, 2, lambda, fwd);
      const Vector b = lasso_row(G, 2, lambda, bwd);
      CHECK((a - b).cwiseAbs().maxCoeff() <= 1e-6);
    }
  }
}

TEST_CASE("scaling the data by c and lambda by c^2 leaves the fit unchanged") {
  const Matrix xi = oracle::random_matrix(80, 5, 3);
  const double c = 3.7;
  LassoOptions opts;
  opts.tol = 1e-12;
  const auto a = fit_var(build_gram(xi, 1), 0.05, opts);
  const auto b = fit_var(build_gram(Matrix(c * xi), 1), 0.05 * c * c, opts);
  CHECK((a.A - b.A).cwiseAbs().maxCoeff() <= 1e-8);
}

TEST_CASE("lasso_row errors") {
  auto G = random_system(3, 1, 9);
  CHECK_THROWS_AS(lasso_row(G, 3, 0.1), Error);
  CHECK_THROWS_AS(lasso_row(G, 0, -1.0), Error);
  G.Gamma.row(1).setZero();
  G.Gamma.col(1).setZero();
  CHECK_THROWS_AS(lasso_row(G, 0, 0.01), Error);

  LassoOptions opts;
  opts.max_iter = 1;
  opts.tol = 1e-14;
  const auto H = random_system(6, 2, 10, 30);
  try {
    lasso_row(H, 0, 0.0, opts);
    FAIL("expected non-convergence");
  } catch (const LassoConvergenceError& e) {
    CHECK(e.category() == ErrorCategory::convergence);
    CHECK(e.last_iterate().size() == 12);
    CHECK(e.kkt_gap() > 0.0);
  }
}

TEST_CASE("fit_var shape, blocks and thread invariance") {
  const auto G = random_system(4, 2, 11);
  const auto one = fit_var(G, 0.02, {}, 1);
  const auto many = fit_var(G, 0.02, {}, 4);
  CHECK(one.A == many.A);
  REQUIRE(one.blocks().size() == 2);
  CHECK(one.block(1).rows() == 4);
  CHECK(one.block(2).cols() == 4);
  CHECK(one.block(2) == one.A.rightCols(4));
  CHECK_THROWS_AS(one.block(3), Error);
  for (Index j = 0; j < 4; ++j)
    for (Index k : one.active_set[static_cast<std::size_t>(j)]) CHECK(one.A(j, k) != 0.0);
}

TEST_CASE("cv_lambda grid head and degenerate grid") {
  const Matrix xi = oracle::random_matrix(120, 4, 12);
  const auto rep = cv_lambda(xi, 1, 10, 4);
  REQUIRE(rep.grid.size() == 10);
  for (std::size_t l = 1; l < rep.grid.size(); ++l) CHECK(rep.grid[l] < rep.grid[l - 1]);
  CHECK(rep.grid.back() == doctest::Approx(rep.grid.front() * 1e-3));
  // Zero fit on every training fold at the head of the grid means every fold
  // score there equals the mean square of its validation block.
  Matrix design, response;
  stack_var_regression(xi, 1, design, response);
  const Index len = design.rows() / 4;
  for (int k = 0; k < 4; ++k) {
    const Index first = k * len;
    const Index count = k == 3 ? design.rows() - first : len;
    const double ms = response.middleRows(first, count).squaredNorm() / (count * 4.0);
    CHECK(rep.fold_scores(0, k) == doctest::Approx(ms).epsilon(1e-12));
  }
  for (std::size_t l = 0; l < rep.grid.size(); ++l)
    CHECK(rep.mean_scores[rep.chosen] <= rep.mean_scores[l]);

  const auto single = cv_lambda(xi, 1, 1, 3);
  CHECK(single.grid.size() == 1);
  CHECK(single.fold_scores.cols() == 3);
  CHECK(single.chosen == 0);

  CHECK_THROWS_AS(cv_lambda(xi, 1, 10, 1), Error);
  CHECK_THROWS_AS(cv_lambda(oracle::random_matrix(4, 2, 1), 1, 10, 5), Error);
}

TEST_CASE("banded VAR support recovery" * doctest::test_suite("mc")) {
  int ok = 0;
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    DgpSpec spec;
    spec.n = 2000;
    spec.p = 10;
    spec.var_design = VarDesign::banded;
    spec.seed = seed;
    const auto sim = simulate_panel(spec);
    const auto cv = cv_lambda(sim.xi, 1);
    const auto fit = fit_var(build_gram(sim.xi, 1), cv.lambda());
    int missed = 0, false_pos = 0, support = 0;
    for (Index i = 0; i < 10; ++i)
      for (Index j = 0; j < 10; ++j) {
        const bool truth = sim.A(i, j) != 0.0;
        const bool est = fit.A(i, j) != 0.0;
        support += truth;
        missed += truth && !est;
        false_pos += !truth && est;
      }
    ok += missed == 0 && false_pos <= 0.2 * support;
  }
  MESSAGE("support recovered in ", ok, " of 20 seeds");
  CHECK(ok >= 16);
}

TEST_CASE("white noise gives a sparse cross-validated fit" * doctest::test_suite("mc")) {
  int ok = 0;
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    DgpSpec spec;
    spec.n = 200;
    spec.p = 50;
    spec.var_design = VarDesign::none;
    spec.seed = seed;
    const auto sim = simulate_panel(spec);
    const auto cv = cv_lambda(sim.xi, 1);
    const auto fit = fit_var(build_gram(sim.xi, 1), cv.lambda());
    ok += fit.nonzeros() <= 0.01 * static_cast<double>(fit.A.size());
  }
  MESSAGE("sparse white-noise fit in ", ok, " of 20 seeds");
  CHECK(ok >= 16);
}
