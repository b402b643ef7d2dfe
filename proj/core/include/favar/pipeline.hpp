#pragma once

#include <optional>

#include "favar/factors.hpp"
#include "favar/moments.hpp"
#include "favar/panel.hpp"
#include "favar/trunc.hpp"
#include "favar/varlasso.hpp"

namespace favar {

struct TauSetting {
  enum class Mode { fixed, cv };
  Mode mode = Mode::cv;
  double value = kNoTruncation;  // fixed mode; +inf means no truncation
  int grid_size = kDefaultTauGridSize;
  std::optional<Index> cv_lags;  // defaults to the VAR order

  static TauSetting fixed(double tau) { return {Mode::fixed, tau, kDefaultTauGridSize, {}}; }
  static TauSetting none() { return fixed(kNoTruncation); }
  static TauSetting cross_validated(int grid = kDefaultTauGridSize) {
    return {Mode::cv, kNoTruncation, grid, {}};
  }
};

struct LambdaSetting {
  enum class Mode { fixed, cv };
  Mode mode = Mode::cv;
  double value = 0.0;
  int n_lambda = kDefaultLambdaGridSize;
  int n_folds = kDefaultFolds;

  static LambdaSetting fixed(double lambda) { return {Mode::fixed, lambda, kDefaultLambdaGridSize, kDefaultFolds}; }
  static LambdaSetting cross_validated(int n_lambda = kDefaultLambdaGridSize,
                                       int n_folds = kDefaultFolds) {
    return {Mode::cv, 0.0, n_lambda, n_folds};
  }
};

struct FitOptions {
  Index r = 0;           // number of factors; 0 skips the factor stage
  bool r_auto = false;   // select r with the Bai-Ng criteria instead
  Index r_max = 0;       // 0: min(8, min(n, p) / 2)
  int r_criterion = 1;   // 0, 1, 2 -> IC_p1, IC_p2, IC_p3
  Index d = 1;
  TauSetting tau;
  LambdaSetting lambda;
  LassoOptions lasso;
  std::size_t threads = 1;

  void validate() const;
};

/// Two-stage estimate: truncation, PCA factor removal, Lasso VAR on the
/// estimated idiosyncratic component.
struct FavarFit {
  FitOptions config;
  TruncationRule rule;
  std::optional<TauCvReport> tau_cv;
  Matrix x_trunc;
  std::optional<FactorNumberReport> r_report;
  std::optional<FactorFit> factors;  // empty when r = 0
  Matrix idio;
  GramSystem gram;
  std::optional<LambdaCvReport> lambda_cv;
  VarFit var;

  Index r() const noexcept { return factors ? factors->r : 0; }
};

FavarFit fit(const PanelSeries& x, const FitOptions& opts);

/// Largest factor number searched for an n x p panel.
Index resolve_r_max(const FitOptions& opts, Index n, Index p);

/// Truncation rule implied by `setting` on `x` (runs the tau CV when asked).
TruncationRule choose_truncation(const PanelSeries& x, const TauSetting& setting,
                                 Index d, std::size_t threads,
                                 std::optional<TauCvReport>* report = nullptr);

}  // namespace favar
