#pragma once

#include "favar/common.hpp"
#include "favar/panel.hpp"

namespace favar {

/// Sample lagged second moment (n - h)^{-1} sum_{t > h} X_t X_{t-h}^T.
/// No centering is applied: the model is zero-mean.
struct LaggedMoment {
  Index lag = 0;
  Matrix matrix;
  Index divisor = 0;
};

/// Raw lagged second moment of the rows of `x`. Requires 0 <= h < n.
Matrix autocov(const Matrix& x, Index h);
LaggedMoment autocov(const PanelSeries& x, Index h);

/// Gram-form moments of the stacked VAR(d) regression built from a series
/// xi (n x p): design row for time t holds (xi_{t-1}, ..., xi_{t-d}) and the
/// response row holds xi_t, for t = d+1..n (N = n - d rows).
///   Gamma = X^T X / N   (pd x pd)
///   gamma = X^T Y / N   (pd x p)
struct GramSystem {
  Matrix Gamma;
  Matrix gamma;
  Index N = 0;
  Index d = 0;
  Index p = 0;
};

/// Stacked design (N x pd) and response (N x p) for rows of `xi`.
void stack_var_regression(const Matrix& xi, Index d, Matrix& design,
                          Matrix& response);

GramSystem build_gram(const Matrix& xi, Index d);
GramSystem build_gram(const PanelSeries& xi, Index d);

/// Gram system from an explicit design/response pair (used for CV folds).
GramSystem gram_from_design(const Matrix& design, const Matrix& response,
                            Index d);

/// Max entrywise absolute difference |a - b|_inf.
double max_norm_diff(const Matrix& a, const Matrix& b);

}  // namespace favar
