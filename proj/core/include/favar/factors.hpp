#pragma once

#include <array>
#include <vector>

#include "favar/common.hpp"
#include "favar/panel.hpp"

namespace favar {

/// Principal-component fit of an (already truncated) panel.
///
/// eigvecs/eigvals are the leading r eigenpairs of the raw second-moment
/// matrix n^{-1} sum_t X_t X_t^T, eigenvalues descending. Each eigenvector is
/// signed so that its largest-magnitude coordinate is positive.
///   loadings = E M^{1/2},  factors_t = M^{-1/2} E^T X_t,
///   common_t = E E^T X_t,  idio_t = X_t - common_t.
struct FactorFit {
  Index r = 0;
  Vector eigvals;
  Matrix eigvecs;   // p x r
  Matrix loadings;  // p x r
  Matrix factors;   // n x r
  Matrix common;    // n x p
  Matrix idio;      // n x p
};

/// Eigenvalues below this are treated as zero.
inline constexpr double kRankTolerance = 1e-12;

FactorFit fit_factors(const Matrix& x_trunc, Index r);
FactorFit fit_factors(const PanelSeries& x_trunc, Index r);

struct Projection {
  Vector common;
  Vector idio;
};

/// common = E E^T x, idio = x - common.
Projection project_common(const FactorFit& fit, const Vector& x_new);

/// Bai-Ng criteria IC_p1, IC_p2, IC_p3 evaluated for k = 0..r_max on
/// log V(k) with V(k) the mean squared PCA residual.
struct FactorNumberReport {
  Index r_max = 0;
  std::vector<double> residual_variance;          // V(k), k = 0..r_max
  std::array<std::vector<double>, 3> criteria;    // IC values per k
  std::array<Index, 3> chosen{};
};

FactorNumberReport select_r(const Matrix& x_trunc, Index r_max);
FactorNumberReport select_r(const PanelSeries& x_trunc, Index r_max);

/// Full descending eigen-decomposition of a symmetric matrix with the
/// largest-coordinate-positive sign convention applied to each vector.
void symmetric_eigen_desc(const Matrix& sym, Vector& values, Matrix& vectors);

}  // namespace favar
