#include "favar/forecast.hpp"

#include <limits>

namespace favar {

Vector forecast_common(const Matrix& eigvecs, const Vector& eigvals,
                       const Matrix& common, const Vector& x_origin, Index h) {
  const Index T = common.rows();
  const Index r = eigvecs.cols();
  if (h < 0) throw Error(ErrorCategory::config, "forecast horizon must be >= 0");
  if (T < h + r + 1) {
    throw Error(ErrorCategory::input, "forecast window too short for horizon and r");
  }
  if (eigvals.size() != r || x_origin.size() != eigvecs.rows() ||
      common.cols() != eigvecs.rows()) {
    throw Error(ErrorCategory::input, "forecast_common: dimension mismatch");
  }
  if (r > 0 && !(eigvals.minCoeff() > kRankTolerance)) {
    throw Error(ErrorCategory::numeric, "forecast_common: singular eigenvalue matrix");
  }
  const Index m = T - h;
  const Matrix g = common.bottomRows(m).transpose() * common.topRows(m) /
                   static_cast<double>(T);
  const Vector scores = eigvals.cwiseInverse().asDiagonal() * (eigvecs.transpose() * x_origin);
  return g * (eigvecs * scores);
}

Vector forecast_common(const FactorFit& fit, const Vector& x_origin, Index h) {
  return forecast_common(fit.eigvecs, fit.eigvals, fit.common, x_origin, h);
}

Vector forecast_idio(const VarFit& var, const Matrix& recent_xi, Index h) {
  const Index d = var.d;
  const Index p = var.p();
  if (h < 1) throw Error(ErrorCategory::config, "idiosyncratic forecast needs h >= 1");
  if (recent_xi.rows() < d || recent_xi.cols() != p) {
    throw Error(ErrorCategory::input,
                "forecast_idio: need " + std::to_string(d) + " lags of a " +
                    std::to_string(p) + "-variate series");
  }
  // history holds xi_{t-d+1}, ..., xi_t followed by forecasts t+1, ..., t+h.
  Matrix history(d + h, p);
  history.topRows(d) = recent_xi.bottomRows(d);
  for (Index s = 1; s <= h; ++s) {
    Vector next = Vector::Zero(p);
    const Index row = d - 1 + s;  // position of xi_{t+s}
    for (Index l = 1; l <= d; ++l) {
      next.noalias() += var.A.middleCols((l - 1) * p, p) * history.row(row - l).transpose();
    }
    history.row(row) = next.transpose();
  }
  return history.row(d - 1 + h).transpose();
}

std::size_t ForecastArm::failed() const {
  std::size_t n = 0;
  for (char c : ok) n += c ? 0 : 1;
  return n;
}

std::vector<std::size_t> ForecastRun::aligned() const {
  std::vector<std::size_t> out;
  for (std::size_t k = 0; k < origins.size(); ++k) {
    if (main.ok[k] && (!baseline || baseline->ok[k])) out.push_back(k);
  }
  return out;
}

Matrix absolute_errors(const ForecastRun& run, const ForecastArm& arm) {
  const auto rows = run.aligned();
  Matrix out(static_cast<Index>(rows.size()), run.realised.cols());
  for (std::size_t k = 0; k < rows.size(); ++k) {
    const auto o = static_cast<Index>(rows[k]);
    out.row(static_cast<Index>(k)) = (arm.forecast.row(o) - run.realised.row(o)).cwiseAbs();
  }
  return out;
}

namespace {

ForecastArm make_arm(std::string label, std::size_t origins, Index p) {
  ForecastArm arm;
  arm.label = std::move(label);
  const double nan = std::numeric_limits<double>::quiet_NaN();
  const auto n = static_cast<Index>(origins);
  arm.forecast = Matrix::Constant(n, p, nan);
  arm.common = Matrix::Constant(n, p, nan);
  arm.idio = Matrix::Constant(n, p, nan);
  arm.tau.assign(origins, nan);
  arm.ok.assign(origins, 0);
  return arm;
}

void forecast_origin(const PanelSeries& x, Index origin, const ForecastOptions& opts,
                     const FitOptions& fit_opts, ForecastArm& arm, std::size_t k,
                     std::string& failure) {
  const Index T = opts.window;
  const Index h = opts.horizon;
  try {
    const PanelSeries window = x.rows(origin - T + 1, T);
    const FavarFit f = fit(window, fit_opts);
    const Vector x_origin = f.x_trunc.row(T - 1).transpose();
    Vector common = Vector::Zero(x.p());
    if (f.factors) common = forecast_common(*f.factors, x_origin, h);
    const Vector idio = forecast_idio(f.var, f.idio, h);
    const auto row = static_cast<Index>(k);
    arm.common.row(row) = common.transpose();
    arm.idio.row(row) = idio.transpose();
    arm.forecast.row(row) = (common + idio).transpose();
    arm.tau[k] = f.rule.tau;
    arm.ok[k] = 1;
  } catch (const Error& e) {
    failure = "origin " + std::to_string(origin) + ": " + e.what();
  }
}

}  // namespace

ForecastRun rolling_forecast(const PanelSeries& x, const ForecastOptions& opts) {
  const Index T = opts.window;
  const Index h = opts.horizon;
  if (h < 1) throw Error(ErrorCategory::config, "forecast horizon must be >= 1");
  if (T < opts.fit.d + 2) throw Error(ErrorCategory::config, "forecast window too short");
  if (x.n() < T + h) {
    throw Error(ErrorCategory::input,
                "rolling forecast needs n >= window + horizon");
  }
  opts.fit.validate();

  ForecastRun run;
  run.window = T;
  run.horizon = h;
  run.order = opts.fit.d;
  for (Index t = T - 1; t + h <= x.n() - 1; ++t) run.origins.push_back(t);
  const std::size_t count = run.origins.size();
  run.realised.resize(static_cast<Index>(count), x.p());
  for (std::size_t k = 0; k < count; ++k) {
    run.realised.row(static_cast<Index>(k)) = x.values().row(run.origins[k] + h);
  }

  FitOptions main_opts = opts.fit;
  main_opts.threads = 1;
  if (main_opts.r_auto && !opts.reselect_r) {
    // Fix r from the first window.
    FitOptions first = main_opts;
    first.lambda = LambdaSetting::fixed(0.0);
    first.r = 0;
    const PanelSeries window = x.rows(0, T);
    const TruncationRule rule = choose_truncation(window, first.tau, first.d, 1);
    const Matrix xt = truncate(window.values(), rule);
    const auto report = select_r(xt, resolve_r_max(main_opts, T, x.p()));
    main_opts.r = report.chosen[static_cast<std::size_t>(main_opts.r_criterion)];
    main_opts.r_auto = false;
  }
  run.r = main_opts.r;

  FitOptions base_opts = main_opts;
  base_opts.tau = TauSetting::none();

  run.main = make_arm("truncated", count, x.p());
  if (opts.baseline) run.baseline = make_arm("untruncated", count, x.p());

  std::vector<std::string> main_fail(count), base_fail(count);
  parallel_for(count, opts.threads, [&](std::size_t k) {
    forecast_origin(x, run.origins[k], opts, main_opts, run.main, k, main_fail[k]);
    if (run.baseline) {
      forecast_origin(x, run.origins[k], opts, base_opts, *run.baseline, k, base_fail[k]);
    }
  });
  for (std::size_t k = 0; k < count; ++k) {
    if (!main_fail[k].empty()) run.main.failures.push_back(main_fail[k]);
    if (run.baseline && !base_fail[k].empty()) run.baseline->failures.push_back(base_fail[k]);
  }
  return run;
}

}  // namespace favar
