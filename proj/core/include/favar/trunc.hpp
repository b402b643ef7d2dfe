#pragma once

#include <limits>
#include <vector>

#include "favar/common.hpp"
#include "favar/panel.hpp"

namespace favar {

inline constexpr double kNoTruncation = std::numeric_limits<double>::infinity();

/// Global level tau on the standardised scale together with the per-variable
/// scales; variable i is clipped at sigma_i * tau. tau = +inf disables
/// truncation.
struct TruncationRule {
  double tau = kNoTruncation;
  ScaleVector scales;

  bool active() const noexcept { return tau != kNoTruncation; }
  Vector thresholds() const;

  static TruncationRule none(Index p);
};

/// X_it(tau) = sign(X_it) * min(tau_i, |X_it|).
Matrix truncate(const Matrix& x, const Vector& thresholds);
Matrix truncate(const Matrix& x, const TruncationRule& rule);
PanelSeries truncate(const PanelSeries& x, const TruncationRule& rule);

/// Strictly increasing, equi-spaced candidate levels.
class TauGrid {
 public:
  TauGrid() = default;
  explicit TauGrid(std::vector<double> values);

  const std::vector<double>& values() const noexcept { return values_; }
  std::size_t size() const noexcept { return values_.size(); }
  double operator[](std::size_t j) const { return values_[j]; }

 private:
  std::vector<double> values_;
};

inline constexpr int kDefaultTauGridSize = 60;

/// J points from the pooled median to the pooled max of |X_it / sigma_i|.
TauGrid build_tau_grid(const PanelSeries& x, const ScaleVector& s,
                       int J = kDefaultTauGridSize);

struct TauCvReport {
  TauGrid grid;
  std::vector<double> scores;
  std::size_t chosen = 0;

  double tau() const { return grid[chosen]; }
};

/// Two-fold (first half / second half) score for one level:
///   max_{0<=h<=d} |G_1(tau,h) - G_2(inf,h)|_inf + |G_2(tau,h) - G_1(inf,h)|_inf
double cv_tau_score(const Matrix& x, const Vector& sigma, Index d, double tau);

/// Scores every grid point; ties resolve to the largest tau.
TauCvReport cv_tau(const PanelSeries& x, const ScaleVector& s, Index d,
                   const TauGrid& grid, std::size_t threads = 1);

/// Index of the minimum score, preferring the largest index among ties.
std::size_t argmin_prefer_last(const std::vector<double>& scores);

}  // namespace favar
