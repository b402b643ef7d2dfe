#include "favar/evaluate.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "favar/rng.hpp"

namespace favar {

namespace {

#include "fluctuation_table.inc"

double quantile_sorted(const std::vector<double>& sorted, double q) {
  if (sorted.empty()) return 0.0;
  const double pos = q * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, sorted.size() - 1);
  const double w = pos - static_cast<double>(lo);
  return (1.0 - w) * sorted[lo] + w * sorted[hi];
}

}  // namespace

std::string to_string(MatrixNorm n) {
  switch (n) {
    case MatrixNorm::max_row_l2: return "max_row_l2";
    case MatrixNorm::max_elementwise: return "max";
    case MatrixNorm::frobenius: return "frobenius";
    case MatrixNorm::l2_col_max: return "l2_col_max";
  }
  return "?";
}

MatrixNorm parse_matrix_norm(const std::string& s) {
  if (s == "max_row_l2" || s == "row") return MatrixNorm::max_row_l2;
  if (s == "max" || s == "max_elementwise") return MatrixNorm::max_elementwise;
  if (s == "frobenius" || s == "F") return MatrixNorm::frobenius;
  if (s == "l2_col_max" || s == "l2inf") return MatrixNorm::l2_col_max;
  throw Error(ErrorCategory::config, "unknown matrix norm '" + s + "'");
}

double matrix_norm(MatrixNorm norm, const Matrix& a) {
  if (a.size() == 0) return 0.0;
  switch (norm) {
    case MatrixNorm::max_row_l2: return a.rowwise().norm().maxCoeff();
    case MatrixNorm::max_elementwise: return a.cwiseAbs().maxCoeff();
    case MatrixNorm::frobenius: return a.norm();
    case MatrixNorm::l2_col_max: return a.colwise().norm().maxCoeff();
  }
  return 0.0;
}

double matrix_error(MatrixNorm norm, const Matrix& estimate, const Matrix& truth) {
  if (estimate.rows() != truth.rows() || estimate.cols() != truth.cols()) {
    throw Error(ErrorCategory::input, "matrix_error: shape mismatch");
  }
  return matrix_norm(norm, estimate - truth);
}

double max_row_l2(const Matrix& A_hat, const Matrix& A) {
  return matrix_error(MatrixNorm::max_row_l2, A_hat, A);
}

MetricReport summarise_errors(MatrixNorm norm, std::vector<double> errors) {
  MetricReport r;
  r.norm = norm;
  for (double e : errors) {
    if (!(e >= 0.0)) throw Error(ErrorCategory::input, "errors must be nonnegative");
  }
  r.errors = std::move(errors);
  if (r.errors.empty()) return r;
  r.mean = std::accumulate(r.errors.begin(), r.errors.end(), 0.0) /
           static_cast<double>(r.errors.size());
  std::vector<double> sorted = r.errors;
  std::sort(sorted.begin(), sorted.end());
  r.q25 = quantile_sorted(sorted, 0.25);
  r.median = quantile_sorted(sorted, 0.5);
  r.q75 = quantile_sorted(sorted, 0.75);
  return r;
}

RmeReport rme_report(std::span<const double> errs_trunc,
                     std::span<const double> errs_plain) {
  if (errs_trunc.size() != errs_plain.size()) {
    throw Error(ErrorCategory::input, "rme: error streams differ in length");
  }
  RmeReport r;
  r.count = errs_trunc.size();
  r.numerator = std::accumulate(errs_trunc.begin(), errs_trunc.end(), 0.0);
  r.denominator = std::accumulate(errs_plain.begin(), errs_plain.end(), 0.0);
  if (!(r.denominator > 0.0)) {
    throw Error(ErrorCategory::numeric, "rme: zero denominator");
  }
  r.ratio = r.numerator / r.denominator;
  return r;
}

double rme(std::span<const double> errs_trunc, std::span<const double> errs_plain) {
  return rme_report(errs_trunc, errs_plain).ratio;
}

double hac_long_run_variance(std::span<const double> series, Index bandwidth) {
  const auto L = static_cast<Index>(series.size());
  if (L < 2) throw Error(ErrorCategory::input, "HAC variance needs >= 2 points");
  const double mean = std::accumulate(series.begin(), series.end(), 0.0) / L;
  auto autocov = [&](Index k) {
    double s = 0.0;
    for (Index t = k; t < L; ++t) {
      s += (series[static_cast<std::size_t>(t)] - mean) *
           (series[static_cast<std::size_t>(t - k)] - mean);
    }
    return s / static_cast<double>(L);
  };
  double v = autocov(0);
  for (Index k = 1; k <= std::min(bandwidth, L - 1); ++k) {
    const double w = 1.0 - static_cast<double>(k) / static_cast<double>(bandwidth + 1);
    v += 2.0 * w * autocov(k);
  }
  return v;
}

FluctuationResult fluctuation_test(std::span<const double> fe_a,
                                   std::span<const double> fe_b, double mu) {
  if (fe_a.size() != fe_b.size()) {
    throw Error(ErrorCategory::input, "fluctuation test: series differ in length");
  }
  if (!(mu > 0.0 && mu < 1.0)) {
    throw Error(ErrorCategory::config, "fluctuation test: mu must lie in (0, 1)");
  }
  const auto L = static_cast<Index>(fe_a.size());
  if (L < static_cast<Index>(std::ceil(2.0 / mu))) {
    throw Error(ErrorCategory::input, "fluctuation test: series too short for mu");
  }
  FluctuationResult res;
  res.mu = mu;
  res.window = static_cast<Index>(std::floor(mu * static_cast<double>(L)));
  if (res.window < 2) {
    throw Error(ErrorCategory::input, "fluctuation test: window shorter than 2");
  }
  res.bandwidth = static_cast<Index>(std::floor(std::cbrt(static_cast<double>(L))));
  res.critical_value = fluctuation_critical_value(mu);

  std::vector<double> diff(static_cast<std::size_t>(L));
  bool all_zero = true;
  for (std::size_t t = 0; t < diff.size(); ++t) {
    diff[t] = fe_a[t] - fe_b[t];
    all_zero = all_zero && diff[t] == 0.0;
  }
  const Index windows = L - res.window + 1;
  res.path.assign(static_cast<std::size_t>(windows), 0.0);
  res.reject.assign(static_cast<std::size_t>(windows), 0);
  if (all_zero) return res;  // identical losses: the statistic is 0 throughout

  const double lrv = hac_long_run_variance(diff, res.bandwidth);
  if (!(lrv > 0.0)) {
    throw Error(ErrorCategory::numeric, "fluctuation test: non-positive long-run variance");
  }
  res.sigma = std::sqrt(lrv);
  const double scale = 1.0 / (res.sigma * std::sqrt(static_cast<double>(res.window)));
  for (Index w = 0; w < windows; ++w) {
    double s = 0.0;
    for (Index j = w; j < w + res.window; ++j) s += diff[static_cast<std::size_t>(j)];
    const double stat = s * scale;
    res.path[static_cast<std::size_t>(w)] = stat;
    const bool rej = std::abs(stat) > res.critical_value;
    res.reject[static_cast<std::size_t>(w)] = rej ? 1 : 0;
    res.any_rejection = res.any_rejection || rej;
  }
  return res;
}

std::vector<double> simulate_fluctuation_critical_values(
    std::span<const double> mus, double alpha, std::size_t paths,
    std::size_t steps, std::uint64_t seed, std::size_t threads) {
  if (paths == 0 || steps < 2) {
    throw Error(ErrorCategory::config, "critical value simulation needs paths and steps");
  }
  std::vector<std::size_t> widths;
  for (double mu : mus) {
    if (!(mu > 0.0 && mu < 1.0)) throw Error(ErrorCategory::config, "mu must lie in (0, 1)");
    widths.push_back(std::max<std::size_t>(
        1, static_cast<std::size_t>(std::llround(mu * static_cast<double>(steps)))));
  }
  const std::size_t k = mus.size();
  std::vector<double> sups(paths * k);
  const double step_sd = 1.0 / std::sqrt(static_cast<double>(steps));

  parallel_for(paths, threads, [&](std::size_t path) {
    Rng rng(derive_seed(seed, path));
    std::vector<double> b(steps + 1, 0.0);
    for (std::size_t s = 1; s <= steps; ++s) b[s] = b[s - 1] + step_sd * rng.normal();
    for (std::size_t m = 0; m < k; ++m) {
      const std::size_t w = widths[m];
      const double norm = std::sqrt(static_cast<double>(w) / static_cast<double>(steps));
      double sup = 0.0;
      for (std::size_t s = w; s <= steps; ++s) sup = std::max(sup, std::abs(b[s] - b[s - w]));
      sups[path * k + m] = sup / norm;
    }
  });

  std::vector<double> out;
  std::vector<double> column(paths);
  for (std::size_t m = 0; m < k; ++m) {
    for (std::size_t path = 0; path < paths; ++path) column[path] = sups[path * k + m];
    std::sort(column.begin(), column.end());
    const auto idx = static_cast<std::size_t>(
        std::ceil((1.0 - alpha) * static_cast<double>(paths))) - 1;
    out.push_back(column[std::min(idx, paths - 1)]);
  }
  return out;
}

std::span<const CriticalValueEntry> fluctuation_critical_table() {
  return kFluctuationCriticalValues;
}

double fluctuation_critical_value(double mu) {
  const auto table = fluctuation_critical_table();
  if (table.empty() || mu < table.front().mu - 1e-12 || mu > table.back().mu + 1e-12) {
    throw Error(ErrorCategory::config,
                "no tabulated fluctuation critical value for mu = " + std::to_string(mu));
  }
  for (std::size_t i = 0; i < table.size(); ++i) {
    if (std::abs(table[i].mu - mu) <= 1e-12) return table[i].value;
    if (i + 1 < table.size() && mu < table[i + 1].mu) {
      const double w = (mu - table[i].mu) / (table[i + 1].mu - table[i].mu);
      return (1.0 - w) * table[i].value + w * table[i + 1].value;
    }
  }
  return table.back().value;
}

}  // namespace favar
