#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "favar/common.hpp"

namespace favar {

enum class MatrixNorm {
  max_row_l2,       // max_i |row_i|_2
  max_elementwise,  // max_ij |a_ij|
  frobenius,
  l2_col_max,       // max_j |col_j|_2
};

std::string to_string(MatrixNorm n);
MatrixNorm parse_matrix_norm(const std::string& s);

double matrix_norm(MatrixNorm norm, const Matrix& a);
double matrix_error(MatrixNorm norm, const Matrix& estimate, const Matrix& truth);

/// max over rows of the Euclidean norm of (A_hat - A) row differences.
double max_row_l2(const Matrix& A_hat, const Matrix& A);

struct MetricReport {
  MatrixNorm norm = MatrixNorm::max_row_l2;
  std::vector<double> errors;
  double mean = 0.0;
  double q25 = 0.0;
  double median = 0.0;
  double q75 = 0.0;
};

MetricReport summarise_errors(MatrixNorm norm, std::vector<double> errors);

struct RmeReport {
  double numerator = 0.0;
  double denominator = 0.0;
  double ratio = 0.0;
  std::size_t count = 0;
};

/// Ratio of summed errors, sum(errs_trunc) / sum(errs_plain).
double rme(std::span<const double> errs_trunc, std::span<const double> errs_plain);
RmeReport rme_report(std::span<const double> errs_trunc,
                     std::span<const double> errs_plain);

/// Bartlett-kernel long-run variance of a demeaned series.
double hac_long_run_variance(std::span<const double> series, Index bandwidth);

struct FluctuationResult {
  double mu = 0.3;
  Index window = 0;                 // m = floor(mu * L)
  Index bandwidth = 0;
  double sigma = 0.0;               // sqrt of the long-run variance
  std::vector<double> path;         // one statistic per complete window
  double critical_value = 0.0;      // two-sided, 5%
  std::vector<char> reject;         // |stat| > critical value
  bool any_rejection = false;
};

/// Rolling-window equal-predictive-accuracy statistic on
/// dL = fe_a - fe_b: sigma^{-1} m^{-1/2} sum over each window of length m.
FluctuationResult fluctuation_test(std::span<const double> fe_a,
                                   std::span<const double> fe_b, double mu);

/// 95% quantile of sup_{s in [mu,1]} |B(s) - B(s - mu)| / sqrt(mu) estimated
/// from `paths` discretised Brownian motions with `steps` increments each.
/// Returns one value per requested mu (all mus share the same paths).
std::vector<double> simulate_fluctuation_critical_values(
    std::span<const double> mus, double alpha, std::size_t paths,
    std::size_t steps, std::uint64_t seed, std::size_t threads = 1);

struct CriticalValueEntry {
  double mu;
  double value;
};

/// Shipped table of simulated 5% two-sided critical values.
std::span<const CriticalValueEntry> fluctuation_critical_table();

/// Table lookup with linear interpolation between tabulated mu values.
double fluctuation_critical_value(double mu);

}  // namespace favar
