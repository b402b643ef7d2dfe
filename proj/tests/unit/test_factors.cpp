#include <doctest.h>

#include "favar/factors.hpp"
#include "favar/moments.hpp"
#include "favar/simulate.hpp"
#include "oracles.hpp"

using namespace favar;

namespace {

SimulatedPanel factor_panel(Index n, Index p, std::uint64_t seed) {
  DgpSpec spec;
  spec.n = n;
  spec.p = p;
  spec.var_design = VarDesign::banded;
  spec.factor_design = FactorDesign::var1;
  spec.r = 3;
  spec.seed = seed;
  return simulate_panel(spec);
}

void check_invariants(const FactorFit& f, const Matrix& x) {
  const Index r = f.r;
  CHECK((f.eigvecs.transpose() * f.eigvecs - Matrix::Identity(r, r)).cwiseAbs().maxCoeff() <= 1e-10);
  const Matrix LtL = f.loadings.transpose() * f.loadings;
  CHECK((LtL - Matrix(f.eigvals.asDiagonal())).cwiseAbs().maxCoeff() <= 1e-8 * f.eigvals.sum());
  // Equal up to one rounding of the subtraction.
  CHECK((f.common + f.idio - x).cwiseAbs().maxCoeff() <= 1e-14 * (1.0 + x.cwiseAbs().maxCoeff()));
  CHECK((f.common - x * f.eigvecs * f.eigvecs.transpose()).cwiseAbs().maxCoeff() <= 1e-10 * (1.0 + x.cwiseAbs().maxCoeff()));
  CHECK((f.factors * f.loadings.transpose() - f.common).cwiseAbs().maxCoeff() <= 1e-8 * (1.0 + x.cwiseAbs().maxCoeff()));
  for (Index j = 1; j < r; ++j) CHECK(f.eigvals(j) <= f.eigvals(j - 1));
}

}  // namespace

TEST_CASE("exact rank-one data is recovered") {
  Vector v(4);
  v << 1, -2, 0.5, 2;
  v.normalize();
  const Vector f = oracle::random_matrix(30, 1, 3).col(0);
  const Matrix x = f * v.transpose();
  const auto fit = fit_factors(x, 1);
  CHECK(std::min((fit.eigvecs.col(0) - v).norm(), (fit.eigvecs.col(0) + v).norm()) <= 1e-8);
  CHECK((fit.common - x).cwiseAbs().maxCoeff() <= 1e-12);
  CHECK(fit.idio.cwiseAbs().maxCoeff() <= 1e-12);
}

TEST_CASE("eigen residuals are small") {
  const Matrix x = oracle::random_matrix(60, 12, 1);
  const auto fit = fit_factors(x, 4);
  const Matrix g = autocov(x, 0);
  for (Index j = 0; j < 4; ++j) {
    const double res = (g * fit.eigvecs.col(j) - fit.eigvals(j) * fit.eigvecs.col(j)).norm();
    CHECK(res <= 1e-8 * fit.eigvals(0));
  }
}

TEST_CASE("sign convention makes the largest coordinate positive") {
  const auto fit = fit_factors(oracle::random_matrix(40, 8, 2), 3);
  for (Index j = 0; j < 3; ++j) {
    Index k = 0;
    fit.eigvecs.col(j).cwiseAbs().maxCoeff(&k);
    CHECK(fit.eigvecs(k, j) > 0.0);
  }
}

TEST_CASE("fit_factors rejects bad ranks") {
  const Matrix x = oracle::random_matrix(10, 4, 1);
  CHECK_THROWS_AS(fit_factors(x, 0), Error);
  CHECK_THROWS_AS(fit_factors(x, 5), Error);
  Matrix rank1 = x.col(0) * Vector::Ones(4).transpose();
  CHECK_THROWS_AS(fit_factors(rank1, 2), Error);
}

TEST_CASE("factor invariants on 50 random panels") {
  for (unsigned seed = 0; seed < 50; ++seed) {
    const int n = 20 + static_cast<int>(seed % 7) * 10;
    const int p = 5 + static_cast<int>(seed % 11);
    const Matrix x = oracle::random_matrix(n, p, 100 + seed);
    const Index r = 1 + seed % 4;
    const auto fit = fit_factors(x, r);
    check_invariants(fit, x);

    const Vector z = oracle::random_matrix(p, 1, 900 + seed).col(0);
    const auto pr = project_common(fit, z);
    CHECK((pr.common + pr.idio - z).cwiseAbs().maxCoeff() <= 1e-14 * (1.0 + z.cwiseAbs().maxCoeff()));
    CHECK(std::abs(pr.common.squaredNorm() + pr.idio.squaredNorm() - z.squaredNorm()) <= 1e-10 * (1.0 + z.squaredNorm()));
    const auto again = project_common(fit, pr.common);
    CHECK((again.common - pr.common).cwiseAbs().maxCoeff() <= 1e-10);
  }
}

TEST_CASE("project_common edge cases") {
  const auto fit = fit_factors(oracle::random_matrix(50, 6, 4), 2);
  const auto e1 = project_common(fit, fit.eigvecs.col(0));
  CHECK((e1.common - fit.eigvecs.col(0)).norm() <= 1e-12);
  CHECK(e1.idio.norm() <= 1e-12);
  // Remove the span of the first two eigenvectors.
  Vector z = oracle::random_matrix(6, 1, 5).col(0);
  z -= fit.eigvecs * (fit.eigvecs.transpose() * z);
  CHECK(project_common(fit, z).common.norm() <= 1e-12);
  CHECK_THROWS_AS(project_common(fit, Vector::Zero(5)), Error);
}

TEST_CASE("select_r range and shape") {
  const Matrix x = oracle::random_matrix(40, 10, 7);
  const auto rep = select_r(x, 1);
  CHECK(rep.residual_variance.size() == 2);
  for (auto c : rep.chosen) CHECK((c == 0 || c == 1));
  CHECK(rep.residual_variance[0] == doctest::Approx(x.squaredNorm() / 400.0));
  CHECK_THROWS_AS(select_r(x, 6), Error);
  CHECK_THROWS_AS(select_r(x, 0), Error);
}

TEST_CASE("Bai-Ng picks few factors on noise" * doctest::test_suite("mc")) {
  int ok = 0;
  for (std::uint64_t seed = 1; seed <= 50; ++seed) {
    DgpSpec spec;
    spec.n = 100;
    spec.p = 100;
    spec.var_design = VarDesign::none;
    spec.factor_design = FactorDesign::none;
    spec.seed = seed;
    const auto rep = select_r(simulate_panel(spec).x, 8);
    ok += rep.chosen[0] <= 2 && rep.chosen[1] <= 2 && rep.chosen[2] <= 2;
  }
  CHECK(ok >= 45);
}

TEST_CASE("Bai-Ng recovers three strong factors" * doctest::test_suite("mc")) {
  // Independent idiosyncratic noise: the banded VAR idiosyncratic part has
  // eigenvalues near 20 at p = 100 and the criteria then over-select.
  int ok = 0;
  for (std::uint64_t seed = 1; seed <= 50; ++seed) {
    DgpSpec spec;
    spec.n = 200;
    spec.p = 100;
    spec.var_design = VarDesign::none;
    spec.factor_design = FactorDesign::var1;
    spec.r = 3;
    spec.seed = seed;
    const auto rep = select_r(simulate_panel(spec).x, 8);
    ok += rep.chosen[0] == 3 && rep.chosen[1] == 3 && rep.chosen[2] == 3;
  }
  CHECK(ok >= 45);
}

TEST_CASE("common component error falls with p" * doctest::test_suite("mc")) {
  std::vector<double> errs;
  for (Index p : {20, 40, 80}) {
    double e = 0.0;
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
      const auto sim = factor_panel(200, p, seed);
      const auto fit = fit_factors(sim.x.values(), 3);
      e += (fit.common - sim.chi).norm() / sim.chi.norm();
    }
    errs.push_back(e / 10.0);
  }
  MESSAGE("relative chi error p=20,40,80: ", errs[0], " ", errs[1], " ", errs[2]);
  CHECK(errs[0] < 0.5);
  CHECK(errs[1] < errs[0]);
  CHECK(errs[2] < errs[1]);
}
