#pragma once

// Straight-line reference implementations used as test oracles. These are
// deliberately naive (explicit loops, no shared code with the library).

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace oracle {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

inline Matrix random_matrix(int rows, int cols, unsigned seed) {
  std::mt19937 gen(seed);
  std::normal_distribution<double> z(0.0, 1.0);
  Matrix m(rows, cols);
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j < cols; ++j) m(i, j) = z(gen);
  return m;
}

inline Matrix autocov(const Matrix& x, int h) {
  const int n = static_cast<int>(x.rows());
  const int p = static_cast<int>(x.cols());
  Matrix g = Matrix::Zero(p, p);
  for (int i = 0; i < p; ++i)
    for (int j = 0; j < p; ++j) {
      double s = 0.0;
      for (int t = h; t < n; ++t) s += x(t, i) * x(t - h, j);
      g(i, j) = s / (n - h);
    }
  return g;
}

inline double max_abs(const Matrix& a) {
  double m = 0.0;
  for (int i = 0; i < a.rows(); ++i)
    for (int j = 0; j < a.cols(); ++j) m = std::max(m, std::abs(a(i, j)));
  return m;
}

inline Matrix clip(const Matrix& x, const Vector& sigma, double tau) {
  Matrix out = x;
  for (int i = 0; i < x.rows(); ++i)
    for (int j = 0; j < x.cols(); ++j) {
      const double c = sigma(j) * tau;
      if (out(i, j) > c) out(i, j) = c;
      if (out(i, j) < -c) out(i, j) = -c;
    }
  return out;
}

// CV(tau) recomputed from the definition with both folds built by hand.
inline double cv_score(const Matrix& x, const Vector& sigma, int d, double tau) {
  const int n = static_cast<int>(x.rows());
  const int half = n / 2;
  const Matrix a = x.topRows(half);
  const Matrix b = x.bottomRows(n - half);
  double best = -1.0;
  for (int h = 0; h <= d; ++h) {
    const double s = max_abs(autocov(clip(a, sigma, tau), h) - autocov(b, h)) +
                     max_abs(autocov(clip(b, sigma, tau), h) - autocov(a, h));
    best = std::max(best, s);
  }
  return best;
}

// Explicit stacked regression followed by plain matrix products.
inline void gram(const Matrix& xi, int d, Matrix& Gamma, Matrix& gamma) {
  const int n = static_cast<int>(xi.rows());
  const int p = static_cast<int>(xi.cols());
  const int N = n - d;
  Matrix X(N, p * d), Y(N, p);
  for (int r = 0; r < N; ++r) {
    const int t = r + d;
    for (int l = 1; l <= d; ++l)
      for (int i = 0; i < p; ++i) X(r, (l - 1) * p + i) = xi(t - l, i);
    for (int i = 0; i < p; ++i) Y(r, i) = xi(t, i);
  }
  Gamma = X.transpose() * X / N;
  gamma = X.transpose() * Y / N;
}

inline double objective(const Matrix& G, const Vector& g, const Vector& b,
                        double lambda) {
  return b.dot(G * b) - 2.0 * b.dot(g) + lambda * b.lpNorm<1>();
}

// FISTA on b'Gb - 2b'g + lambda|b|_1 with step 1/(2 L), L = lambda_max(G).
inline Vector fista(const Matrix& G, const Vector& g, double lambda,
                    int iters = 200000) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(G);
  const double L = 2.0 * es.eigenvalues().maxCoeff();
  const double step = 1.0 / L;
  Vector b = Vector::Zero(g.size()), y = b, prev = b;
  double t = 1.0;
  for (int it = 0; it < iters; ++it) {
    const Vector grad = 2.0 * (G * y - g);
    Vector z = y - step * grad;
    for (int k = 0; k < z.size(); ++k) {
      const double a = std::abs(z(k)) - step * lambda;
      z(k) = a > 0.0 ? std::copysign(a, z(k)) : 0.0;
    }
    prev = b;
    b = z;
    const double tn = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));
    y = b + ((t - 1.0) / tn) * (b - prev);
    t = tn;
    if (it > 100 && (b - prev).lpNorm<Eigen::Infinity>() < 1e-15) break;
  }
  return b;
}

inline double max_row_l2(const Matrix& a, const Matrix& b) {
  double m = 0.0;
  for (int i = 0; i < a.rows(); ++i) {
    double s = 0.0;
    for (int j = 0; j < a.cols(); ++j) s += (a(i, j) - b(i, j)) * (a(i, j) - b(i, j));
    m = std::max(m, std::sqrt(s));
  }
  return m;
}

inline std::filesystem::path scratch_dir(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / ("favar_test_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

}  // namespace oracle
