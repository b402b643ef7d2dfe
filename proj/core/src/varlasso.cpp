#include "favar/varlasso.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <Eigen/Eigenvalues>

namespace favar {

namespace {

constexpr long kRefineEvery = 1000;

double soft_threshold(double z, double level) {
  if (z > level) return z - level;
  if (z < -level) return z + level;
  return 0.0;
}

double sign(double v) { return v > 0.0 ? 1.0 : (v < 0.0 ? -1.0 : 0.0); }

double kkt_gap_from_grad(const Vector& grad, const Vector& beta, double lambda) {
  // grad = Gamma beta - target; stationarity reads 2 grad_k + lambda s_k = 0.
  double gap = 0.0;
  for (Index k = 0; k < beta.size(); ++k) {
    const double g2 = 2.0 * grad(k);
    const double v = beta(k) == 0.0 ? std::max(0.0, std::abs(g2) - lambda)
                                    : std::abs(g2 + lambda * sign(beta(k)));
    gap = std::max(gap, v);
  }
  return gap;
}

// With the signs s of the active set S held fixed, the objective restricted to
// S is b'G b - 2 b'(target - lambda s / 2). If the right-hand side has a
// component in the null space of G_SS the objective falls linearly along it,
// so follow that ray to the first sign change. Otherwise take the Newton step
// to the restricted minimiser, cut back at the first sign change. A step is
// kept only if the objective did not increase.
bool refine_step(const Matrix& Gamma, const Eigen::Ref<const Vector>& target,
                 double lambda, Vector& beta) {
  std::vector<Index> S;
  for (Index k = 0; k < beta.size(); ++k)
    if (beta(k) != 0.0) S.push_back(k);
  if (S.empty()) return false;
  const Index m = static_cast<Index>(S.size());
  Matrix GSS(m, m);
  Vector rhs(m), bS(m);
  for (Index a = 0; a < m; ++a) {
    bS(a) = beta(S[a]);
    rhs(a) = target(S[a]) - 0.5 * lambda * sign(bS(a));
    for (Index b = 0; b < m; ++b) GSS(a, b) = Gamma(S[a], S[b]);
  }
  const Eigen::SelfAdjointEigenSolver<Matrix> es(GSS);
  if (es.info() != Eigen::Success) return false;
  const Vector& ev = es.eigenvalues();
  const Matrix& U = es.eigenvectors();
  const double cut = 1e-10 * std::max(ev.cwiseAbs().maxCoeff(), 1e-300);
  const Vector c_rhs = U.transpose() * rhs;
  const Vector c_b = U.transpose() * bS;

  Vector null_rhs = Vector::Zero(m);
  for (Index i = 0; i < m; ++i)
    if (ev(i) <= cut) null_rhs += c_rhs(i) * U.col(i);
  const bool ray = null_rhs.norm() > 1e-12 * std::max(1.0, rhs.norm());

  Vector dir(m);
  double t = std::numeric_limits<double>::infinity();
  if (ray) {
    dir = null_rhs;
  } else {
    Vector c_sol = c_b;  // null-space part of beta is kept
    for (Index i = 0; i < m; ++i)
      if (ev(i) > cut) c_sol(i) = c_rhs(i) / ev(i);
    dir = U * c_sol - bS;
    t = 1.0;
  }
  Index hit = -1;
  for (Index a = 0; a < m; ++a) {
    if (bS(a) * dir(a) < 0.0) {
      const double ta = -bS(a) / dir(a);
      if (ta < t) {
        t = ta;
        hit = a;
      }
    }
  }
  if (!std::isfinite(t)) return false;

  Vector trial = beta;
  for (Index a = 0; a < m; ++a) trial(S[a]) = bS(a) + t * dir(a);
  if (hit >= 0) trial(S[hit]) = 0.0;
  const Vector tgt = target;
  if (!(gram_objective(Gamma, tgt, trial, lambda) <=
        gram_objective(Gamma, tgt, beta, lambda))) {
    return false;
  }
  beta = trial;
  return true;
}

// Used when plain coordinate descent crawls on a (near-)singular Gram matrix:
// ray steps until none applies, then at most one Newton step.
bool refine_active_set(const Matrix& Gamma, const Eigen::Ref<const Vector>& target,
                       double lambda, Vector& beta) {
  bool moved = false;
  for (Index pass = 0; pass <= beta.size(); ++pass) {
    const Index before = static_cast<Index>((beta.array() != 0.0).count());
    if (!refine_step(Gamma, target, lambda, beta)) break;
    moved = true;
    if (static_cast<Index>((beta.array() != 0.0).count()) == before) break;
  }
  return moved;
}

}  // namespace

double gram_objective(const Matrix& Gamma, const Vector& target,
                      const Vector& beta, double lambda) {
  return beta.dot(Gamma * beta) - 2.0 * beta.dot(target) +
         lambda * beta.lpNorm<1>();
}

double kkt_gap(const Matrix& Gamma, const Vector& target, const Vector& beta,
               double lambda) {
  return kkt_gap_from_grad(Gamma * beta - target, beta, lambda);
}

Vector lasso_row(const GramSystem& G, Index j, double lambda,
                 const LassoOptions& opts, const Vector* warm, long* sweeps) {
  const Index m = G.Gamma.rows();
  if (j < 0 || j >= G.gamma.cols()) {
    throw Error(ErrorCategory::input, "lasso_row: row index out of range");
  }
  if (!(lambda >= 0.0)) {
    throw Error(ErrorCategory::config, "lasso penalty must be >= 0");
  }
  const auto target = G.gamma.col(j);
  for (Index k = 0; k < m; ++k) {
    if (!(G.Gamma(k, k) > 0.0) && target(k) != 0.0) {
      throw Error(ErrorCategory::numeric,
                  "lasso_row: zero Gram diagonal at coordinate " +
                      std::to_string(k) + " with nonzero target");
    }
  }

  Vector beta = warm ? *warm : Vector::Zero(m);
  if (beta.size() != m) {
    throw Error(ErrorCategory::input, "lasso_row: warm start has wrong length");
  }
  Vector grad = G.Gamma * beta - target;  // Gamma beta - gamma_(j)
  const double level = 0.5 * lambda;
  const double kkt_tol = 10.0 * opts.tol;

  for (long sweep = 1; sweep <= opts.max_iter; ++sweep) {
    double max_change = 0.0;
    for (Index step = 0; step < m; ++step) {
      const Index k = opts.reverse_order ? m - 1 - step : step;
      const double gkk = G.Gamma(k, k);
      if (!(gkk > 0.0)) continue;  // zero column of a PSD Gram matrix
      const double old = beta(k);
      // gamma_k - sum_{l != k} Gamma_kl beta_l
      const double z = gkk * old - grad(k);
      const double updated = soft_threshold(z, level) / gkk;
      const double delta = updated - old;
      if (delta != 0.0) {
        beta(k) = updated;
        grad.noalias() += G.Gamma.col(k) * delta;
        max_change = std::max(max_change, std::abs(delta));
      }
    }
    if (opts.on_sweep) opts.on_sweep(sweep, beta);
    if (max_change <= opts.tol) {
      // Refresh the gradient to drop accumulated rounding before certifying.
      grad = G.Gamma * beta - target;
      if (kkt_gap_from_grad(grad, beta, lambda) <= kkt_tol) {
        if (sweeps) *sweeps = sweep;
        return beta;
      }
    }
    if (sweep % kRefineEvery == 0 &&
        refine_active_set(G.Gamma, target, lambda, beta)) {
      grad = G.Gamma * beta - target;
    }
  }
  const double gap = kkt_gap(G.Gamma, target, beta, lambda);
  throw LassoConvergenceError(
      "lasso_row: no convergence after " + std::to_string(opts.max_iter) +
          " sweeps (KKT gap " + std::to_string(gap) + ")",
      beta, gap);
}

Matrix VarFit::block(Index lag) const {
  if (lag < 1 || lag > d) {
    throw Error(ErrorCategory::input, "VAR block lag out of range");
  }
  return A.middleCols((lag - 1) * p(), p());
}

std::vector<Matrix> VarFit::blocks() const {
  std::vector<Matrix> out;
  for (Index l = 1; l <= d; ++l) out.push_back(block(l));
  return out;
}

Index VarFit::nonzeros() const {
  return static_cast<Index>((A.array() != 0.0).count());
}

VarFit fit_var(const GramSystem& G, double lambda, const LassoOptions& opts,
               std::size_t threads, const Matrix* warm) {
  const Index p = G.p;
  const Index m = G.Gamma.rows();
  if (G.gamma.rows() != m || G.gamma.cols() != p || m != p * G.d) {
    throw Error(ErrorCategory::input, "fit_var: inconsistent Gram system");
  }
  if (warm && (warm->rows() != p || warm->cols() != m)) {
    throw Error(ErrorCategory::input, "fit_var: warm start has wrong shape");
  }
  VarFit fit;
  fit.A = Matrix::Zero(p, m);
  fit.lambda = lambda;
  fit.d = G.d;
  fit.active_set.resize(static_cast<std::size_t>(p));
  fit.iterations.assign(static_cast<std::size_t>(p), 0);

  parallel_for(static_cast<std::size_t>(p), threads, [&](std::size_t row) {
    const Index j = static_cast<Index>(row);
    Vector start;
    if (warm) start = warm->row(j).transpose();
    long sweeps = 0;
    Vector beta;
    try {
      beta = lasso_row(G, j, lambda, opts, warm ? &start : nullptr, &sweeps);
    } catch (const Error& e) {
      rethrow_with_stage("row " + std::to_string(j), e);
    }
    fit.A.row(j) = beta.transpose();
    fit.iterations[row] = sweeps;
    for (Index k = 0; k < m; ++k) {
      if (beta(k) != 0.0) fit.active_set[row].push_back(k);
    }
  });
  return fit;
}

double lambda_max(const GramSystem& G) {
  if (G.gamma.size() == 0) return 0.0;
  return 2.0 * G.gamma.cwiseAbs().maxCoeff();
}

LambdaCvReport cv_lambda(const Matrix& xi, Index d, int n_lambda, int n_folds,
                         const LassoOptions& opts, std::size_t threads) {
  if (n_folds < 2) throw Error(ErrorCategory::config, "cv_lambda needs n_folds >= 2");
  if (n_lambda < 1) throw Error(ErrorCategory::config, "cv_lambda needs n_lambda >= 1");

  Matrix design, response;
  stack_var_regression(xi, d, design, response);
  const Index N = design.rows();
  const Index p = response.cols();
  const Index fold_len = N / n_folds;
  if (fold_len < 1 || N - fold_len < 2) {
    throw Error(ErrorCategory::input,
                "cv_lambda: " + std::to_string(N) +
                    " regression rows cannot form " + std::to_string(n_folds) +
                    " folds");
  }

  struct Fold {
    GramSystem train;
    Matrix val_x, val_y;
  };
  std::vector<Fold> folds(static_cast<std::size_t>(n_folds));
  double lmax = lambda_max(gram_from_design(design, response, d));
  for (int k = 0; k < n_folds; ++k) {
    const Index first = k * fold_len;
    const Index last = (k == n_folds - 1) ? N : first + fold_len;  // exclusive
    const Index count = last - first;
    Matrix tx(N - count, design.cols()), ty(N - count, p);
    tx << design.topRows(first), design.bottomRows(N - last);
    ty << response.topRows(first), response.bottomRows(N - last);
    auto& f = folds[static_cast<std::size_t>(k)];
    f.train = gram_from_design(tx, ty, d);
    f.val_x = design.middleRows(first, count);
    f.val_y = response.middleRows(first, count);
    lmax = std::max(lmax, lambda_max(f.train));
  }
  if (!(lmax > 0.0)) {
    throw Error(ErrorCategory::numeric, "cv_lambda: data are identically zero");
  }

  LambdaCvReport report;
  report.grid.resize(static_cast<std::size_t>(n_lambda));
  for (int l = 0; l < n_lambda; ++l) {
    const double frac = n_lambda == 1 ? 0.0 : static_cast<double>(l) / (n_lambda - 1);
    report.grid[static_cast<std::size_t>(l)] = lmax * std::pow(kLambdaMinRatio, frac);
  }
  report.fold_scores.resize(n_lambda, n_folds);

  for (int k = 0; k < n_folds; ++k) {
    const auto& f = folds[static_cast<std::size_t>(k)];
    Matrix warm = Matrix::Zero(p, design.cols());
    for (int l = 0; l < n_lambda; ++l) {
      VarFit fit;
      try {
        fit = fit_var(f.train, report.grid[static_cast<std::size_t>(l)], opts,
                      threads, &warm);
      } catch (const Error& e) {
        rethrow_with_stage("cv_lambda fold " + std::to_string(k), e);
      }
      warm = fit.A;
      const Matrix resid = f.val_y - f.val_x * fit.A.transpose();
      report.fold_scores(l, k) = resid.squaredNorm() / static_cast<double>(resid.size());
    }
  }

  report.mean_scores.resize(static_cast<std::size_t>(n_lambda));
  for (int l = 0; l < n_lambda; ++l) {
    report.mean_scores[static_cast<std::size_t>(l)] = report.fold_scores.row(l).mean();
  }
  // Strict comparison keeps the largest lambda among ties.
  report.chosen = 0;
  for (std::size_t l = 1; l < report.mean_scores.size(); ++l) {
    if (report.mean_scores[l] < report.mean_scores[report.chosen]) report.chosen = l;
  }
  return report;
}

}  // namespace favar
