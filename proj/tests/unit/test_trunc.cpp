#include <doctest.h>

#include <random>

#include "favar/moments.hpp"
#include "favar/trunc.hpp"
#include "oracles.hpp"

using namespace favar;

namespace {

TruncationRule rule_with(double tau, Index p, double sigma = 1.0) {
  TruncationRule r;
  r.tau = tau;
  r.scales.sigma = Vector::Constant(p, sigma);
  return r;
}

}  // namespace

TEST_CASE("truncate clips symmetrically") {
  Matrix x(1, 3);
  x << 5, -5, 1.5;
  const Matrix y = truncate(x, rule_with(2.0, 3));
  CHECK(y(0, 0) == 2.0);
  CHECK(y(0, 1) == -2.0);
  CHECK(y(0, 2) == 1.5);
  CHECK(truncate(x, TruncationRule::none(3)) == x);
  CHECK_THROWS_AS(truncate(x, rule_with(2.0, 2)), Error);
}

TEST_CASE("per-variable thresholds are sigma_i * tau") {
  TruncationRule r;
  r.tau = 2.0;
  r.scales.sigma = Vector::LinSpaced(3, 1.0, 3.0);
  Matrix x = Matrix::Constant(2, 3, 100.0);
  const Matrix y = truncate(x, r);
  CHECK(y(0, 0) == 2.0);
  CHECK(y(0, 1) == 4.0);
  CHECK(y(1, 2) == 6.0);
}

TEST_CASE("truncate idempotence and monotonicity over random cases") {
  std::mt19937_64 gen(42);
  std::uniform_real_distribution<double> tau_dist(0.05, 5.0);
  std::student_t_distribution<double> heavy(1.5);
  for (int c = 0; c < 1000; ++c) {
    const int n = 3 + static_cast<int>(gen() % 8);
    const int p = 1 + static_cast<int>(gen() % 5);
    Matrix x(n, p);
    for (int t = 0; t < n; ++t)
      for (int i = 0; i < p; ++i) x(t, i) = heavy(gen);
    TruncationRule a;
    a.scales.sigma = Vector(p);
    for (int i = 0; i < p; ++i) a.scales.sigma(i) = tau_dist(gen);
    a.tau = tau_dist(gen);
    TruncationRule b = a;
    b.tau = a.tau + tau_dist(gen);

    const Matrix ya = truncate(x, a);
    REQUIRE(truncate(ya, a) == ya);
    const Matrix yb = truncate(x, b);
    for (int t = 0; t < n; ++t)
      for (int i = 0; i < p; ++i) {
        REQUIRE(std::abs(ya(t, i)) <= std::abs(yb(t, i)));
        REQUIRE(std::abs(ya(t, i)) <= a.scales.sigma(i) * a.tau);
        REQUIRE((ya(t, i) == 0.0 || std::signbit(ya(t, i)) == std::signbit(x(t, i))));
        if (std::abs(x(t, i)) <= a.scales.sigma(i) * a.tau) REQUIRE(ya(t, i) == x(t, i));
      }
  }
}

TEST_CASE("build_tau_grid") {
  ScaleVector unit{Vector::Ones(1)};
  Matrix x(3, 1);
  x << 1, -1, 3;
  SUBCASE("endpoints") {
    const auto g = build_tau_grid(PanelSeries(x), unit, 2);
    CHECK(g.values() == std::vector<double>{1.0, 3.0});
  }
  SUBCASE("equi-spaced") {
    const auto g = build_tau_grid(PanelSeries(x), unit, 3);
    CHECK(g.values() == std::vector<double>{1.0, 2.0, 3.0});
  }
  SUBCASE("default size is 60 with constant step") {
    const PanelSeries y(oracle::random_matrix(50, 4, 9));
    const auto g = build_tau_grid(y, mad_scales(y));
    REQUIRE(g.size() == 60);
    const double step = g[1] - g[0];
    for (std::size_t j = 1; j < g.size(); ++j)
      CHECK(g[j] - g[j - 1] == doctest::Approx(step).epsilon(1e-9));
  }
  SUBCASE("degenerate magnitudes") {
    Matrix z(4, 1);
    z << 2, -2, 2, -2;
    CHECK_THROWS_AS(build_tau_grid(PanelSeries(z), unit, 5), Error);
  }
  SUBCASE("J < 2") { CHECK_THROWS_AS(build_tau_grid(PanelSeries(x), unit, 1), Error); }
  SUBCASE("non-increasing custom grid") {
    CHECK_THROWS_AS(TauGrid({1.0, 1.0}), Error);
    CHECK_THROWS_AS(TauGrid({-1.0, 1.0}), Error);
  }
}

TEST_CASE("cv_tau matches a straight-line re-implementation") {
  const PanelSeries x(oracle::random_matrix(50, 4, 2024));
  const auto s = mad_scales(x);
  const TauGrid grid({0.8, 1.6, 2.4});
  for (Index d : {0, 1, 2}) {
    const auto rep = cv_tau(x, s, d, grid);
    for (std::size_t j = 0; j < grid.size(); ++j) {
      const double ref = oracle::cv_score(x.values(), s.sigma, static_cast<int>(d), grid[j]);
      CHECK(std::abs(rep.scores[j] - ref) <= 1e-10);
      CHECK(cv_tau_score(x.values(), s.sigma, d, grid[j]) == rep.scores[j]);
    }
  }
}

TEST_CASE("inactive truncation gives constant scores and the largest tau") {
  const PanelSeries x(oracle::random_matrix(40, 3, 7));
  const auto s = mad_scales(x);
  double top = 0.0;
  for (Index i = 0; i < x.p(); ++i)
    top = std::max(top, x.values().col(i).cwiseAbs().maxCoeff() / s.sigma(i));
  const TauGrid grid({top * 1.01, top * 2.0, top * 3.0});
  const auto rep = cv_tau(x, s, 1, grid);
  CHECK(rep.scores[0] == rep.scores[1]);
  CHECK(rep.scores[1] == rep.scores[2]);
  CHECK(rep.chosen == 2);
}

TEST_CASE("no clipping at tau_J reproduces the raw moments exactly") {
  const PanelSeries x(oracle::random_matrix(30, 3, 8));
  const auto s = mad_scales(x);
  const auto g = build_tau_grid(x, s, 10);
  TruncationRule r;
  r.tau = g.values().back();
  r.scales = s;
  const Matrix y = truncate(x.values(), r);
  for (Index h = 0; h <= 2; ++h) CHECK(autocov(y, h) == autocov(x.values(), h));
}

TEST_CASE("a single huge outlier pulls tau below the top of the grid") {
  Matrix m = oracle::random_matrix(100, 4, 13);
  m(37, 2) = 1e6;
  const PanelSeries x(m);
  const auto s = mad_scales(x);
  const auto grid = build_tau_grid(x, s);
  const auto rep = cv_tau(x, s, 1, grid);
  CHECK(rep.chosen < grid.size() - 1);
  const double at_top = oracle::cv_score(m, s.sigma, 1, grid.values().back());
  const double at_best = oracle::cv_score(m, s.sigma, 1, rep.tau());
  CHECK(at_top > at_best);
}

TEST_CASE("cv scores are invariant to column relabelling") {
  const Matrix m = oracle::random_matrix(60, 5, 21);
  Matrix pm(60, 5);
  const int perm[5] = {3, 0, 4, 1, 2};
  for (int j = 0; j < 5; ++j) pm.col(j) = m.col(perm[j]);
  const PanelSeries x(m), px(pm);
  const auto grid = build_tau_grid(x, mad_scales(x), 12);
  const auto a = cv_tau(x, mad_scales(x), 1, grid);
  const auto b = cv_tau(px, mad_scales(px), 1, grid);
  for (std::size_t j = 0; j < grid.size(); ++j)
    CHECK(a.scores[j] == doctest::Approx(b.scores[j]).epsilon(1e-14));
  CHECK(a.chosen == b.chosen);
}

TEST_CASE("cv_tau is independent of the thread count") {
  const PanelSeries x(oracle::random_matrix(80, 6, 4));
  const auto s = mad_scales(x);
  const auto grid = build_tau_grid(x, s);
  const auto one = cv_tau(x, s, 2, grid, 1);
  const auto many = cv_tau(x, s, 2, grid, 8);
  CHECK(one.scores == many.scores);
  CHECK(one.chosen == many.chosen);
}

TEST_CASE("cv_tau rejects folds that are too short") {
  const PanelSeries x(oracle::random_matrix(5, 2, 1));
  CHECK_THROWS_AS(cv_tau(x, mad_scales(x), 2, TauGrid({1.0, 2.0})), Error);
}

TEST_CASE("argmin prefers the last minimiser") {
  CHECK(argmin_prefer_last({3, 1, 2, 1}) == 3);
  CHECK(argmin_prefer_last({0.5}) == 0);
}
