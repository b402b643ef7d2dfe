#pragma once

#include <optional>
#include <string>
#include <vector>

#include "favar/factors.hpp"
#include "favar/pipeline.hpp"
#include "favar/varlasso.hpp"

namespace favar {

/// Best linear predictor of the common component h steps ahead of the last
/// window row:
///   Gchi(h) E M^{-1} E^T X_t(tau),
///   Gchi(h) = T^{-1} sum_{u=h}^{T-1} chi_u chi_{u-h}^T   (window rows u).
/// `common` holds the in-window common component (T x p); `x_origin` is the
/// truncated observation at the origin.
Vector forecast_common(const Matrix& eigvecs, const Vector& eigvals,
                       const Matrix& common, const Vector& x_origin, Index h);
Vector forecast_common(const FactorFit& fit, const Vector& x_origin, Index h);

/// Iterated VAR forecast sum_l A_l xi_{t+h-l}; rows of `recent_xi` end at
/// the origin t and must supply at least d rows. Values dated after t are
/// replaced by their own forecasts.
Vector forecast_idio(const VarFit& var, const Matrix& recent_xi, Index h);

struct ForecastOptions {
  Index window = 120;
  Index horizon = 1;
  FitOptions fit;           // fit.d is the VAR order
  bool baseline = false;    // also run the untruncated (tau = inf) arm
  bool reselect_r = false;  // with fit.r_auto: select r in every window
  std::size_t threads = 1;  // parallel origins
};

struct ForecastArm {
  std::string label;
  Matrix forecast;  // origins x p (NaN rows for failed origins)
  Matrix common;
  Matrix idio;
  std::vector<double> tau;      // selected level per origin
  std::vector<char> ok;         // per origin
  std::vector<std::string> failures;  // "origin <t>: <message>"

  std::size_t failed() const;
};

struct ForecastRun {
  Index window = 0;
  Index horizon = 0;
  Index order = 0;
  Index r = 0;                  // factor number used when fixed
  std::vector<Index> origins;   // 0-based row index of each origin t
  Matrix realised;              // X_{t+h}, origins x p
  ForecastArm main;
  std::optional<ForecastArm> baseline;

  /// Origins that succeeded in every arm that was run.
  std::vector<std::size_t> aligned() const;
};

ForecastRun rolling_forecast(const PanelSeries& x, const ForecastOptions& opts);

/// |forecast - realised| on the aligned origins (rows follow aligned()).
Matrix absolute_errors(const ForecastRun& run, const ForecastArm& arm);

}  // namespace favar
