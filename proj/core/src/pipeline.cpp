#include "favar/pipeline.hpp"

#include <algorithm>
#include <cmath>

namespace favar {

void FitOptions::validate() const {
  if (r < 0) throw Error(ErrorCategory::config, "r must be >= 0");
  if (r_auto && r_max < 0) throw Error(ErrorCategory::config, "r_max must be >= 0");
  if (r_criterion < 0 || r_criterion > 2) {
    throw Error(ErrorCategory::config, "r criterion must be 0, 1 or 2");
  }
  if (d < 1) throw Error(ErrorCategory::config, "VAR order d must be >= 1");
  if (tau.mode == TauSetting::Mode::fixed && !(tau.value > 0.0)) {
    throw Error(ErrorCategory::config, "fixed tau must be positive (or inf)");
  }
  if (tau.mode == TauSetting::Mode::cv && tau.grid_size < 2) {
    throw Error(ErrorCategory::config, "tau grid size must be >= 2");
  }
  if (lambda.mode == LambdaSetting::Mode::fixed && !(lambda.value >= 0.0)) {
    throw Error(ErrorCategory::config, "fixed lambda must be >= 0");
  }
  if (lambda.mode == LambdaSetting::Mode::cv &&
      (lambda.n_lambda < 1 || lambda.n_folds < 2)) {
    throw Error(ErrorCategory::config, "lambda CV needs n_lambda >= 1, folds >= 2");
  }
  if (!(lasso.tol > 0.0) || lasso.max_iter < 1) {
    throw Error(ErrorCategory::config, "invalid lasso tolerance or iteration cap");
  }
}

TruncationRule choose_truncation(const PanelSeries& x, const TauSetting& setting,
                                 Index d, std::size_t threads,
                                 std::optional<TauCvReport>* report) {
  if (setting.mode == TauSetting::Mode::fixed && std::isinf(setting.value)) {
    return TruncationRule::none(x.p());
  }
  TruncationRule rule;
  try {
    rule.scales = mad_scales(x);
  } catch (const Error& e) {
    rethrow_with_stage("scales", e);
  }
  if (setting.mode == TauSetting::Mode::fixed) {
    rule.tau = setting.value;
    return rule;
  }
  try {
    const Index lags = setting.cv_lags.value_or(d);
    const TauGrid grid = build_tau_grid(x, rule.scales, setting.grid_size);
    TauCvReport cv = cv_tau(x, rule.scales, lags, grid, threads);
    rule.tau = cv.tau();
    if (report) *report = std::move(cv);
  } catch (const Error& e) {
    rethrow_with_stage("tau-cv", e);
  }
  return rule;
}

Index resolve_r_max(const FitOptions& opts, Index n, Index p) {
  return opts.r_max > 0 ? opts.r_max : std::min<Index>(8, std::min(n, p) / 2);
}

FavarFit fit(const PanelSeries& x, const FitOptions& opts) {
  opts.validate();
  FavarFit out;
  out.config = opts;
  out.rule = choose_truncation(x, opts.tau, opts.d, opts.threads, &out.tau_cv);
  out.x_trunc = truncate(x.values(), out.rule);

  Index r = opts.r;
  if (opts.r_auto) {
    try {
      out.r_report = select_r(out.x_trunc, resolve_r_max(opts, x.n(), x.p()));
    } catch (const Error& e) {
      rethrow_with_stage("factor-number", e);
    }
    r = out.r_report->chosen[static_cast<std::size_t>(opts.r_criterion)];
  }
  if (r > 0) {
    try {
      out.factors = fit_factors(out.x_trunc, r);
    } catch (const Error& e) {
      rethrow_with_stage("factors", e);
    }
    out.idio = out.factors->idio;
  } else {
    out.idio = out.x_trunc;
  }

  try {
    out.gram = build_gram(out.idio, opts.d);
  } catch (const Error& e) {
    rethrow_with_stage("gram", e);
  }

  double lambda = opts.lambda.value;
  if (opts.lambda.mode == LambdaSetting::Mode::cv) {
    try {
      out.lambda_cv = cv_lambda(out.idio, opts.d, opts.lambda.n_lambda,
                                opts.lambda.n_folds, opts.lasso, opts.threads);
    } catch (const Error& e) {
      rethrow_with_stage("lambda-cv", e);
    }
    lambda = out.lambda_cv->lambda();
  }
  try {
    out.var = fit_var(out.gram, lambda, opts.lasso, opts.threads);
  } catch (const Error& e) {
    rethrow_with_stage("var", e);
  }
  return out;
}

}  // namespace favar
