#include "favar/factors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "favar/moments.hpp"

namespace favar {

void symmetric_eigen_desc(const Matrix& sym, Vector& values, Matrix& vectors) {
  Eigen::SelfAdjointEigenSolver<Matrix> solver(sym);
  if (solver.info() != Eigen::Success) {
    throw Error(ErrorCategory::numeric, "symmetric eigendecomposition failed");
  }
  const Index p = sym.rows();
  values = solver.eigenvalues().reverse();
  vectors = solver.eigenvectors().rowwise().reverse();
  for (Index j = 0; j < p; ++j) {
    Index arg = 0;
    vectors.col(j).cwiseAbs().maxCoeff(&arg);
    if (vectors(arg, j) < 0.0) vectors.col(j) *= -1.0;
  }
}

FactorFit fit_factors(const Matrix& x, Index r) {
  const Index n = x.rows();
  const Index p = x.cols();
  if (r < 1 || r > std::min(n, p)) {
    throw Error(ErrorCategory::config,
                "factor number r = " + std::to_string(r) +
                    " must lie in [1, min(n, p)]");
  }
  Vector values;
  Matrix vectors;
  symmetric_eigen_desc(autocov(x, 0), values, vectors);
  if (!(values(r - 1) > kRankTolerance)) {
    throw Error(ErrorCategory::numeric,
                "rank deficiency: eigenvalue " + std::to_string(r) + " is " +
                    std::to_string(values(r - 1)));
  }

  FactorFit fit;
  fit.r = r;
  fit.eigvals = values.head(r);
  fit.eigvecs = vectors.leftCols(r);
  const Vector root = fit.eigvals.cwiseSqrt();
  fit.loadings = fit.eigvecs * root.asDiagonal();
  const Matrix scores = x * fit.eigvecs;  // n x r, rows are E^T X_t
  fit.factors = scores * root.cwiseInverse().asDiagonal();
  fit.common = scores * fit.eigvecs.transpose();
  fit.idio = x - fit.common;
  return fit;
}

FactorFit fit_factors(const PanelSeries& x_trunc, Index r) {
  return fit_factors(x_trunc.values(), r);
}

Projection project_common(const FactorFit& fit, const Vector& x_new) {
  if (x_new.size() != fit.eigvecs.rows()) {
    throw Error(ErrorCategory::input, "project_common: length mismatch");
  }
  Projection out;
  out.common = fit.eigvecs * (fit.eigvecs.transpose() * x_new);
  out.idio = x_new - out.common;
  return out;
}

FactorNumberReport select_r(const Matrix& x, Index r_max) {
  const Index n = x.rows();
  const Index p = x.cols();
  if (r_max < 1 || 2 * r_max > std::min(n, p)) {
    throw Error(ErrorCategory::config,
                "r_max must satisfy 1 <= r_max <= min(n, p) / 2");
  }
  Vector values;
  Matrix vectors;
  symmetric_eigen_desc(autocov(x, 0), values, vectors);

  const double nd = static_cast<double>(n);
  const double pd = static_cast<double>(p);
  const double np = nd * pd;
  const double m = std::min(nd, pd);
  const double g1 = (nd + pd) / np * std::log(np / (nd + pd));
  const double g2 = (nd + pd) / np * std::log(m);
  const double g3 = std::log(m) / m;

  FactorNumberReport report;
  report.r_max = r_max;
  const double total = x.squaredNorm() / np;
  Matrix resid = x;
  for (Index k = 0; k <= r_max; ++k) {
    double v = total;
    if (k > 0) {
      const auto e = vectors.col(k - 1);
      resid -= (resid * e) * e.transpose();
      v = resid.squaredNorm() / np;
    }
    report.residual_variance.push_back(v);
    const double lv = std::log(std::max(v, std::numeric_limits<double>::min()));
    const double kd = static_cast<double>(k);
    report.criteria[0].push_back(lv + kd * g1);
    report.criteria[1].push_back(lv + kd * g2);
    report.criteria[2].push_back(lv + kd * g3);
  }
  for (std::size_t c = 0; c < 3; ++c) {
    const auto& ic = report.criteria[c];
    report.chosen[c] =
        static_cast<Index>(std::min_element(ic.begin(), ic.end()) - ic.begin());
  }
  return report;
}

FactorNumberReport select_r(const PanelSeries& x_trunc, Index r_max) {
  return select_r(x_trunc.values(), r_max);
}

}  // namespace favar
