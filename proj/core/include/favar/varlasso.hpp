#pragma once

#include <functional>
#include <vector>

#include "favar/common.hpp"
#include "favar/moments.hpp"

namespace favar {

struct LassoOptions {
  double tol = 1e-7;          // max absolute coordinate change per sweep
  long max_iter = 100'000;    // sweeps
  bool reverse_order = false; // sweep coordinates pd-1..0 instead of 0..pd-1
  /// Called after every sweep with the sweep index and current iterate.
  std::function<void(long, const Vector&)> on_sweep;
};

/// Thrown when coordinate descent exhausts max_iter; carries the last
/// iterate and its KKT gap.
class LassoConvergenceError : public Error {
 public:
  LassoConvergenceError(const std::string& what, Vector last, double kkt_gap)
      : Error(ErrorCategory::convergence, what),
        last_(std::move(last)),
        kkt_gap_(kkt_gap) {}

  const Vector& last_iterate() const noexcept { return last_; }
  double kkt_gap() const noexcept { return kkt_gap_; }

 private:
  Vector last_;
  double kkt_gap_;
};

/// beta^T Gamma beta - 2 beta^T target + lambda |beta|_1
double gram_objective(const Matrix& Gamma, const Vector& target,
                      const Vector& beta, double lambda);

/// Largest violation of the subgradient conditions of gram_objective:
/// |2(Gamma b - target)_k| <= lambda where b_k = 0 and
/// 2(Gamma b - target)_k = -lambda sign(b_k) on the support.
double kkt_gap(const Matrix& Gamma, const Vector& target, const Vector& beta,
               double lambda);

/// Row sub-problem j: argmin_b b^T Gamma b - 2 b^T gamma_(j) + lambda |b|_1,
/// by cyclic coordinate descent with soft-threshold level lambda / 2.
/// Returns once a sweep moves no coordinate by more than tol and the KKT gap
/// is at most 10 tol. Every 1000 sweeps a sign-preserving active-set step
/// (descent ray or Newton) is tried to get past slow progress on singular or
/// near-singular Gram matrices. `warm` (optional)
/// is the starting iterate.
Vector lasso_row(const GramSystem& G, Index j, double lambda,
                 const LassoOptions& opts = {}, const Vector* warm = nullptr,
                 long* sweeps = nullptr);

struct VarFit {
  Matrix A;  // p x pd, [A_1 ... A_d]
  double lambda = 0.0;
  Index d = 0;
  std::vector<std::vector<Index>> active_set;
  std::vector<long> iterations;

  Index p() const noexcept { return A.rows(); }
  /// Lag-l block A_l (1-based lag).
  Matrix block(Index lag) const;
  std::vector<Matrix> blocks() const;
  Index nonzeros() const;
};

VarFit fit_var(const GramSystem& G, double lambda, const LassoOptions& opts = {},
               std::size_t threads = 1, const Matrix* warm = nullptr);

/// Smallest lambda for which every row solution is exactly zero.
double lambda_max(const GramSystem& G);

struct LambdaCvReport {
  std::vector<double> grid;   // strictly decreasing
  Matrix fold_scores;         // n_lambda x n_folds
  std::vector<double> mean_scores;
  std::size_t chosen = 0;

  double lambda() const { return grid[chosen]; }
};

inline constexpr int kDefaultLambdaGridSize = 50;
inline constexpr int kDefaultFolds = 5;
inline constexpr double kLambdaMinRatio = 1e-3;

/// Contiguous time-block cross-validation of lambda. The grid starts at the
/// largest lambda_max over the full sample and every training fold and runs
/// log-spaced down to kLambdaMinRatio times that. Score: one-step-ahead mean
/// squared prediction error on the held-out block, averaged over folds.
LambdaCvReport cv_lambda(const Matrix& xi, Index d,
                         int n_lambda = kDefaultLambdaGridSize,
                         int n_folds = kDefaultFolds,
                         const LassoOptions& opts = {}, std::size_t threads = 1);

}  // namespace favar
