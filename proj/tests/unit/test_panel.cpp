#include <doctest.h>

#include <fstream>
#include <numeric>

#include "favar/panel.hpp"
#include "oracles.hpp"

using namespace favar;

namespace {

std::filesystem::path write_text(const std::string& name, const std::string& text) {
  const auto path = oracle::scratch_dir("panel") / name;
  std::ofstream(path) << text;
  return path;
}

Matrix column(std::initializer_list<double> v) {
  Matrix m(static_cast<Index>(v.size()), 1);
  Index i = 0;
  for (double x : v) m(i++, 0) = x;
  return m;
}

}  // namespace

TEST_CASE("load_csv reads a headerless panel") {
  const auto x = load_csv(write_text("a.csv", "1,2\n3,4\n5,6\n"), false);
  CHECK(x.n() == 3);
  CHECK(x.p() == 2);
  CHECK(x.values()(2, 1) == 6.0);
  CHECK(x.names() == std::vector<std::string>{"V1", "V2"});
}

TEST_CASE("load_csv takes names from the header") {
  const auto x = load_csv(write_text("h.csv", "gdp, cpi\n1,2\n3,4\n"), true);
  CHECK(x.names() == std::vector<std::string>{"gdp", "cpi"});
  CHECK(x.n() == 2);
}

TEST_CASE("load_csv rejects bad input") {
  CHECK_THROWS_AS(load_csv(write_text("e.csv", ""), false), Error);
  CHECK_THROWS_AS(load_csv(write_text("r.csv", "1,2\n3\n"), false), Error);
  CHECK_THROWS_AS(load_csv("/nonexistent/file.csv", false), Error);
  try {
    load_csv(write_text("n.csv", "1,2\n3,NaN\n"), false);
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.category() == ErrorCategory::input);
    const std::string msg = e.what();
    CHECK(msg.find("row 2") != std::string::npos);
    CHECK(msg.find("column 2") != std::string::npos);
    CHECK(msg.find("NaN") != std::string::npos);
  }
}

TEST_CASE("panel construction validates shape") {
  CHECK_THROWS_AS(PanelSeries(Matrix::Zero(1, 3)), Error);
  CHECK_THROWS_AS(PanelSeries(Matrix::Zero(3, 0)), Error);
  Matrix bad = Matrix::Zero(3, 2);
  bad(1, 1) = std::numeric_limits<double>::infinity();
  CHECK_THROWS_AS(PanelSeries{bad}, Error);
}

TEST_CASE("csv round trip is exact") {
  const auto dir = oracle::scratch_dir("panel_rt");
  for (unsigned seed = 0; seed < 20; ++seed) {
    Matrix m = oracle::random_matrix(17, 5, seed);
    m *= std::pow(10.0, static_cast<double>(seed % 7) - 3.0);
    const PanelSeries x(m);
    write_csv(dir / "x.csv", x);
    const auto y = load_csv(dir / "x.csv", true);
    CHECK(y.names() == x.names());
    for (Index t = 0; t < m.rows(); ++t)
      for (Index i = 0; i < m.cols(); ++i)
        CHECK(std::abs(y.values()(t, i) - m(t, i)) <= 1e-12 * std::abs(m(t, i)));
  }
}

TEST_CASE("mad_scales") {
  SUBCASE("hand example") {
    const auto s = mad_scales(PanelSeries(column({1, 2, 3})));
    CHECK(s.sigma(0) == 1.0);
    CHECK(s.method == "mad");
  }
  SUBCASE("constant column is rejected by name") {
    Matrix m(3, 2);
    m << 1, 5, 2, 5, 3, 5;
    try {
      mad_scales(PanelSeries(m, {"a", "flat"}));
      FAIL("expected an error");
    } catch (const Error& e) {
      CHECK(std::string(e.what()).find("flat") != std::string::npos);
    }
  }
  SUBCASE("zero MAD with an outlier") {
    CHECK_THROWS_AS(mad_scales(PanelSeries(column({0, 0, 0, 100}))), Error);
  }
  SUBCASE("even length median") {
    const std::vector<double> v{4, 1, 3, 2};
    CHECK(median(v) == 2.5);
  }
}

TEST_CASE("mad_scales commutes with column permutation") {
  const Matrix m = oracle::random_matrix(31, 6, 3);
  std::vector<int> perm(6);
  std::iota(perm.begin(), perm.end(), 0);
  std::mt19937 gen(11);
  const auto base = mad_scales(PanelSeries(m));
  for (int rep = 0; rep < 10; ++rep) {
    std::shuffle(perm.begin(), perm.end(), gen);
    Matrix pm(m.rows(), m.cols());
    for (int j = 0; j < 6; ++j) pm.col(j) = m.col(perm[j]);
    const auto s = mad_scales(PanelSeries(pm));
    for (int j = 0; j < 6; ++j) CHECK(s.sigma(j) == base.sigma(perm[j]));
  }
}

TEST_CASE("standardise") {
  SUBCASE("unit scales leave data unchanged") {
    const Matrix m = oracle::random_matrix(5, 3, 1);
    ScaleVector s{Vector::Ones(3)};
    CHECK(standardise(PanelSeries(m), s).values() == m);
  }
  SUBCASE("hand example") {
    ScaleVector s{Vector::Constant(1, 2.0)};
    const auto y = standardise(PanelSeries(column({2, 4, 6})), s);
    CHECK(y.values()(0, 0) == 1.0);
    CHECK(y.values()(2, 0) == 3.0);
  }
  SUBCASE("round trip and unit MAD") {
    const PanelSeries x(oracle::random_matrix(40, 7, 5) * 3.0);
    const auto s = mad_scales(x);
    const auto y = standardise(x, s);
    Matrix back = y.values();
    for (Index i = 0; i < x.p(); ++i) back.col(i) *= s.sigma(i);
    CHECK((back - x.values()).cwiseAbs().maxCoeff() <= 1e-12);
    const auto unit = mad_scales(y);
    for (Index i = 0; i < x.p(); ++i) CHECK(unit.sigma(i) == doctest::Approx(1.0).epsilon(1e-12));
  }
  SUBCASE("dimension mismatch") {
    ScaleVector s{Vector::Ones(2)};
    CHECK_THROWS_AS(standardise(PanelSeries(oracle::random_matrix(4, 3, 0)), s), Error);
  }
}
