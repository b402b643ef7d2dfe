#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "favar/common.hpp"

namespace favar {

/// An n x p panel: rows are time points, columns are variables.
/// Immutable after construction; construction validates shape and finiteness.
class PanelSeries {
 public:
  PanelSeries() = default;
  explicit PanelSeries(Matrix values);
  PanelSeries(Matrix values, std::vector<std::string> names);

  const Matrix& values() const noexcept { return values_; }
  const std::vector<std::string>& names() const noexcept { return names_; }
  Index n() const noexcept { return values_.rows(); }
  Index p() const noexcept { return values_.cols(); }

  /// Rows [first, first + count) as a new panel with the same names.
  PanelSeries rows(Index first, Index count) const;

  /// Same names, new values (must have p columns).
  PanelSeries with_values(Matrix values) const;

 private:
  Matrix values_;
  std::vector<std::string> names_;
};

std::vector<std::string> default_names(Index p);

/// Reads a comma-separated panel. Every cell must parse as a finite real.
PanelSeries load_csv(const std::filesystem::path& path, bool has_header);

/// Writes values with 17 significant digits so load_csv round-trips exactly.
void write_csv(const std::filesystem::path& path, const PanelSeries& x,
               bool header = true);
void write_matrix_csv(const std::filesystem::path& path, const Matrix& m,
                      const std::vector<std::string>& header = {});

/// Per-variable robust scales (raw median absolute deviation).
struct ScaleVector {
  Vector sigma;
  std::string method = "mad";

  Index size() const noexcept { return sigma.size(); }
};

/// Median with the even-length convention of averaging the two central
/// order statistics. Copies its input.
double median(std::span<const double> values);

ScaleVector mad_scales(const PanelSeries& x);

/// Divides column i by sigma_i.
PanelSeries standardise(const PanelSeries& x, const ScaleVector& s);

}  // namespace favar
