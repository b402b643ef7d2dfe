#include "favar/trunc.hpp"

#include <algorithm>
#include <cmath>

#include "favar/moments.hpp"

namespace favar {

Vector TruncationRule::thresholds() const {
  return (scales.sigma * tau).eval();
}

TruncationRule TruncationRule::none(Index p) {
  TruncationRule r;
  r.tau = kNoTruncation;
  r.scales.sigma = Vector::Ones(p);
  return r;
}

Matrix truncate(const Matrix& x, const Vector& thresholds) {
  if (thresholds.size() != x.cols()) {
    throw Error(ErrorCategory::input, "truncate: threshold length does not match p");
  }
  Matrix out(x.rows(), x.cols());
  for (Index i = 0; i < x.cols(); ++i) {
    const double c = thresholds(i);
    for (Index t = 0; t < x.rows(); ++t) {
      out(t, i) = std::clamp(x(t, i), -c, c);
    }
  }
  return out;
}

Matrix truncate(const Matrix& x, const TruncationRule& rule) {
  if (!rule.active()) return x;
  if (!(rule.tau > 0.0)) {
    throw Error(ErrorCategory::config, "truncation level must be positive");
  }
  return truncate(x, rule.thresholds());
}

PanelSeries truncate(const PanelSeries& x, const TruncationRule& rule) {
  return x.with_values(truncate(x.values(), rule));
}

TauGrid::TauGrid(std::vector<double> values) : values_(std::move(values)) {
  if (values_.empty()) {
    throw Error(ErrorCategory::config, "tau grid is empty");
  }
  for (std::size_t j = 0; j < values_.size(); ++j) {
    if (!(values_[j] > 0.0) || (j > 0 && !(values_[j] > values_[j - 1]))) {
      throw Error(ErrorCategory::config,
                  "tau grid must be positive and strictly increasing");
    }
  }
}

TauGrid build_tau_grid(const PanelSeries& x, const ScaleVector& s, int J) {
  if (J < 2) throw Error(ErrorCategory::config, "tau grid needs J >= 2");
  if (s.size() != x.p()) {
    throw Error(ErrorCategory::input, "scale vector length does not match p");
  }
  std::vector<double> pooled;
  pooled.reserve(static_cast<std::size_t>(x.values().size()));
  for (Index i = 0; i < x.p(); ++i) {
    for (Index t = 0; t < x.n(); ++t) {
      pooled.push_back(std::abs(x.values()(t, i) / s.sigma(i)));
    }
  }
  const double lo = median(pooled);
  const double hi = *std::max_element(pooled.begin(), pooled.end());
  if (!(hi > lo)) {
    throw Error(ErrorCategory::input,
                "tau grid is degenerate: median and max of standardised "
                "magnitudes coincide");
  }
  std::vector<double> values(static_cast<std::size_t>(J));
  const double step = (hi - lo) / (J - 1);
  for (int j = 0; j < J; ++j) values[static_cast<std::size_t>(j)] = lo + step * j;
  values.back() = hi;
  return TauGrid(std::move(values));
}

namespace {

struct FoldSplit {
  Matrix first;
  Matrix second;
};

FoldSplit split_halves(const Matrix& x) {
  const Index half = x.rows() / 2;
  return {x.topRows(half), x.bottomRows(x.rows() - half)};
}

void check_cv_shape(Index n, Index d) {
  if (d < 0) throw Error(ErrorCategory::config, "cv lags must be >= 0");
  if (n < 2 * (d + 1)) {
    throw Error(ErrorCategory::input,
                "tau cross-validation folds too short for lag " +
                    std::to_string(d) + " (n = " + std::to_string(n) + ")");
  }
}

double score_against(const FoldSplit& raw, const std::vector<Matrix>& plain1,
                     const std::vector<Matrix>& plain2, const Vector& sigma,
                     Index d, double tau) {
  Matrix t1 = raw.first;
  Matrix t2 = raw.second;
  if (tau != kNoTruncation) {
    const Vector c = sigma * tau;
    t1 = truncate(raw.first, c);
    t2 = truncate(raw.second, c);
  }
  double score = 0.0;
  for (Index h = 0; h <= d; ++h) {
    const double term = max_norm_diff(autocov(t1, h), plain2[static_cast<std::size_t>(h)]) +
                        max_norm_diff(autocov(t2, h), plain1[static_cast<std::size_t>(h)]);
    score = std::max(score, term);
  }
  return score;
}

}  // namespace

double cv_tau_score(const Matrix& x, const Vector& sigma, Index d, double tau) {
  check_cv_shape(x.rows(), d);
  const FoldSplit raw = split_halves(x);
  std::vector<Matrix> plain1, plain2;
  for (Index h = 0; h <= d; ++h) {
    plain1.push_back(autocov(raw.first, h));
    plain2.push_back(autocov(raw.second, h));
  }
  return score_against(raw, plain1, plain2, sigma, d, tau);
}

std::size_t argmin_prefer_last(const std::vector<double>& scores) {
  std::size_t best = 0;
  for (std::size_t j = 1; j < scores.size(); ++j) {
    if (scores[j] <= scores[best]) best = j;
  }
  return best;
}

TauCvReport cv_tau(const PanelSeries& x, const ScaleVector& s, Index d,
                   const TauGrid& grid, std::size_t threads) {
  check_cv_shape(x.n(), d);
  if (s.size() != x.p()) {
    throw Error(ErrorCategory::input, "scale vector length does not match p");
  }
  if (grid.size() == 0) throw Error(ErrorCategory::config, "empty tau grid");

  const FoldSplit raw = split_halves(x.values());
  std::vector<Matrix> plain1, plain2;
  for (Index h = 0; h <= d; ++h) {
    plain1.push_back(autocov(raw.first, h));
    plain2.push_back(autocov(raw.second, h));
  }

  TauCvReport report;
  report.grid = grid;
  report.scores.assign(grid.size(), 0.0);
  parallel_for(grid.size(), threads, [&](std::size_t j) {
    report.scores[j] = score_against(raw, plain1, plain2, s.sigma, d, grid[j]);
  });
  report.chosen = argmin_prefer_last(report.scores);
  return report;
}

}  // namespace favar
