#include "favar/moments.hpp"

namespace favar {

Matrix autocov(const Matrix& x, Index h) {
  const Index n = x.rows();
  if (h < 0 || h >= n) {
    throw Error(ErrorCategory::input,
                "autocov lag " + std::to_string(h) + " needs 0 <= h < n = " +
                    std::to_string(n));
  }
  const Index m = n - h;
  Matrix g = x.bottomRows(m).transpose() * x.topRows(m);
  g /= static_cast<double>(m);
  if (h == 0) g = (0.5 * (g + g.transpose())).eval();  // exact symmetry
  return g;
}

LaggedMoment autocov(const PanelSeries& x, Index h) {
  return {h, autocov(x.values(), h), x.n() - h};
}

void stack_var_regression(const Matrix& xi, Index d, Matrix& design,
                          Matrix& response) {
  const Index n = xi.rows();
  const Index p = xi.cols();
  if (d < 1 || n < d + 2) {
    throw Error(ErrorCategory::input,
                "VAR(" + std::to_string(d) + ") regression needs n >= d + 2, got n = " +
                    std::to_string(n));
  }
  const Index N = n - d;
  design.resize(N, p * d);
  for (Index l = 1; l <= d; ++l) {
    design.middleCols((l - 1) * p, p) = xi.middleRows(d - l, N);
  }
  response = xi.bottomRows(N);
}

GramSystem gram_from_design(const Matrix& design, const Matrix& response,
                            Index d) {
  GramSystem g;
  g.N = design.rows();
  g.d = d;
  g.p = response.cols();
  const double inv = 1.0 / static_cast<double>(g.N);
  g.Gamma.noalias() = design.transpose() * design;
  g.Gamma *= inv;
  // Exact symmetry regardless of the GEMM kernel's summation order.
  g.Gamma = 0.5 * (g.Gamma + g.Gamma.transpose()).eval();
  g.gamma.noalias() = design.transpose() * response;
  g.gamma *= inv;
  return g;
}

GramSystem build_gram(const Matrix& xi, Index d) {
  Matrix design, response;
  stack_var_regression(xi, d, design, response);
  return gram_from_design(design, response, d);
}

GramSystem build_gram(const PanelSeries& xi, Index d) {
  return build_gram(xi.values(), d);
}

double max_norm_diff(const Matrix& a, const Matrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw Error(ErrorCategory::input, "max_norm_diff: shape mismatch");
  }
  if (a.size() == 0) return 0.0;
  return (a - b).cwiseAbs().maxCoeff();
}

}  // namespace favar
