#include "favar/panel.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

namespace favar {

namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

std::vector<std::string_view> split_commas(std::string_view line) {
  std::vector<std::string_view> cells;
  std::size_t start = 0;
  for (;;) {
    const auto comma = line.find(',', start);
    if (comma == std::string_view::npos) {
      cells.push_back(trim(line.substr(start)));
      return cells;
    }
    cells.push_back(trim(line.substr(start, comma - start)));
    start = comma + 1;
  }
}

std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v,
                                 std::chars_format::general, 17);
  return std::string(buf, res.ptr);
}

}  // namespace

std::vector<std::string> default_names(Index p) {
  std::vector<std::string> names;
  names.reserve(static_cast<std::size_t>(p));
  for (Index i = 0; i < p; ++i) names.push_back("V" + std::to_string(i + 1));
  return names;
}

PanelSeries::PanelSeries(Matrix values)
    : PanelSeries(std::move(values), {}) {}

PanelSeries::PanelSeries(Matrix values, std::vector<std::string> names)
    : values_(std::move(values)), names_(std::move(names)) {
  if (values_.rows() < 2 || values_.cols() < 1) {
    throw Error(ErrorCategory::input,
                "panel needs n >= 2 rows and p >= 1 columns, got " +
                    std::to_string(values_.rows()) + "x" +
                    std::to_string(values_.cols()));
  }
  if (!values_.allFinite()) {
    throw Error(ErrorCategory::input, "panel contains non-finite values");
  }
  if (names_.empty()) {
    names_ = default_names(values_.cols());
  } else if (static_cast<Index>(names_.size()) != values_.cols()) {
    throw Error(ErrorCategory::input, "number of names does not match p");
  }
}

PanelSeries PanelSeries::rows(Index first, Index count) const {
  if (first < 0 || count < 0 || first + count > n()) {
    throw Error(ErrorCategory::input, "row range out of bounds");
  }
  return PanelSeries(values_.middleRows(first, count), names_);
}

PanelSeries PanelSeries::with_values(Matrix values) const {
  return PanelSeries(std::move(values), names_);
}

PanelSeries load_csv(const std::filesystem::path& path, bool has_header) {
  std::ifstream in(path);
  if (!in) {
    throw Error(ErrorCategory::io, "cannot open " + path.string());
  }

  std::vector<std::string> names;
  std::vector<double> cells;
  Index p = -1;
  Index n = 0;
  std::string line;
  std::size_t line_no = 0;
  bool header_pending = has_header;

  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto fields = split_commas(line);
    if (header_pending) {
      header_pending = false;
      for (auto f : fields) names.emplace_back(f);
      p = static_cast<Index>(names.size());
      continue;
    }
    if (p < 0) p = static_cast<Index>(fields.size());
    if (static_cast<Index>(fields.size()) != p) {
      throw Error(ErrorCategory::input,
                  path.string() + ":" + std::to_string(line_no) +
                      ": ragged row with " + std::to_string(fields.size()) +
                      " cells, expected " + std::to_string(p));
    }
    for (std::size_t j = 0; j < fields.size(); ++j) {
      const auto f = fields[j];
      double v = 0.0;
      const auto res = std::from_chars(f.data(), f.data() + f.size(), v);
      if (f.empty() || res.ec != std::errc{} || res.ptr != f.data() + f.size() ||
          !std::isfinite(v)) {
        throw Error(ErrorCategory::input,
                    path.string() + ": row " + std::to_string(line_no) +
                        ", column " + std::to_string(j + 1) +
                        ": not a finite number '" + std::string(f) + "'");
      }
      cells.push_back(v);
    }
    ++n;
  }

  if (n == 0) {
    throw Error(ErrorCategory::input, path.string() + ": no data rows");
  }

  Matrix values(n, p);
  for (Index t = 0; t < n; ++t) {
    for (Index i = 0; i < p; ++i) {
      values(t, i) = cells[static_cast<std::size_t>(t * p + i)];
    }
  }
  return PanelSeries(std::move(values), std::move(names));
}

void write_matrix_csv(const std::filesystem::path& path, const Matrix& m,
                      const std::vector<std::string>& header) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCategory::io, "cannot write " + path.string());
  if (!header.empty()) {
    for (std::size_t j = 0; j < header.size(); ++j) {
      if (j) out << ',';
      out << header[j];
    }
    out << '\n';
  }
  for (Index t = 0; t < m.rows(); ++t) {
    for (Index i = 0; i < m.cols(); ++i) {
      if (i) out << ',';
      out << format_double(m(t, i));
    }
    out << '\n';
  }
  if (!out) throw Error(ErrorCategory::io, "write failed: " + path.string());
}

void write_csv(const std::filesystem::path& path, const PanelSeries& x,
               bool header) {
  write_matrix_csv(path, x.values(),
                   header ? x.names() : std::vector<std::string>{});
}

double median(std::span<const double> values) {
  if (values.empty()) {
    throw Error(ErrorCategory::input, "median of empty sequence");
  }
  std::vector<double> v(values.begin(), values.end());
  const std::size_t mid = v.size() / 2;
  std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid),
                   v.end());
  const double upper = v[mid];
  if (v.size() % 2 == 1) return upper;
  const double lower =
      *std::max_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid));
  return 0.5 * (lower + upper);
}

ScaleVector mad_scales(const PanelSeries& x) {
  ScaleVector s;
  s.sigma.resize(x.p());
  std::vector<double> col(static_cast<std::size_t>(x.n()));
  for (Index i = 0; i < x.p(); ++i) {
    for (Index t = 0; t < x.n(); ++t) col[static_cast<std::size_t>(t)] = x.values()(t, i);
    const double m = median(col);
    for (auto& v : col) v = std::abs(v - m);
    const double mad = median(col);
    if (!(mad > 0.0)) {
      throw Error(ErrorCategory::input,
                  "zero median absolute deviation in column '" +
                      x.names()[static_cast<std::size_t>(i)] + "'");
    }
    s.sigma(i) = mad;
  }
  return s;
}

PanelSeries standardise(const PanelSeries& x, const ScaleVector& s) {
  if (s.size() != x.p()) {
    throw Error(ErrorCategory::input, "scale vector length does not match p");
  }
  Matrix out = x.values();
  for (Index i = 0; i < x.p(); ++i) out.col(i) /= s.sigma(i);
  return x.with_values(std::move(out));
}

}  // namespace favar
