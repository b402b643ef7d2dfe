#include "favar/simulate.hpp"

#include <cmath>
#include <numbers>

#include <Eigen/Eigenvalues>

#include "favar/factors.hpp"
#include "favar/rng.hpp"

namespace favar {

namespace {

// Sub-stream ids under a DgpSpec seed.
enum Stream : std::uint64_t {
  kStreamA = 1,
  kStreamEpsBurn = 2,
  kStreamEps = 3,
  kStreamFactorParams = 4,
  kStreamUBurn = 5,
  kStreamU = 6,
};

constexpr double kStabilityMargin = 1e-8;

}  // namespace

void DgpSpec::validate() const {
  if (n < 2 || p < 2) throw Error(ErrorCategory::config, "DGP needs n >= 2 and p >= 2");
  if (innovation.law == InnovationLaw::student_t && !(innovation.nu > 2.0)) {
    throw Error(ErrorCategory::config, "student-t innovations need nu > 2");
  }
  if (burn_in < 100) throw Error(ErrorCategory::config, "burn_in must be >= 100");
  if (factor_design == FactorDesign::var1 && r < 1) {
    throw Error(ErrorCategory::config, "factor design needs r >= 1");
  }
  if (sigma_eps == NoiseCovariance::power_decay &&
      !(std::abs(power_decay_base) < 1.0)) {
    throw Error(ErrorCategory::config, "power decay base must lie in (-1, 1)");
  }
}

std::string to_string(VarDesign v) {
  switch (v) {
    case VarDesign::none: return "none";
    case VarDesign::banded: return "banded";
    case VarDesign::erdos_renyi: return "erdos_renyi";
  }
  return "?";
}
std::string to_string(InnovationLaw v) {
  switch (v) {
    case InnovationLaw::gaussian: return "gaussian";
    case InnovationLaw::student_t: return "t";
    case InnovationLaw::lognormal: return "lognormal";
  }
  return "?";
}
std::string to_string(FactorDesign v) {
  return v == FactorDesign::var1 ? "var1" : "none";
}
std::string to_string(NoiseCovariance v) {
  return v == NoiseCovariance::power_decay ? "power_decay" : "identity";
}

VarDesign parse_var_design(const std::string& s) {
  if (s == "none" || s == "V0") return VarDesign::none;
  if (s == "banded" || s == "V1") return VarDesign::banded;
  if (s == "erdos_renyi" || s == "V2") return VarDesign::erdos_renyi;
  throw Error(ErrorCategory::config, "unknown VAR design '" + s + "'");
}
InnovationLaw parse_innovation_law(const std::string& s) {
  if (s == "gaussian" || s == "normal" || s == "I1") return InnovationLaw::gaussian;
  if (s == "t" || s == "student_t" || s == "I2") return InnovationLaw::student_t;
  if (s == "lognormal" || s == "I3") return InnovationLaw::lognormal;
  throw Error(ErrorCategory::config, "unknown innovation law '" + s + "'");
}
FactorDesign parse_factor_design(const std::string& s) {
  if (s == "none" || s == "F2") return FactorDesign::none;
  if (s == "var1" || s == "F1") return FactorDesign::var1;
  throw Error(ErrorCategory::config, "unknown factor design '" + s + "'");
}
NoiseCovariance parse_noise_covariance(const std::string& s) {
  if (s == "identity" || s == "S1") return NoiseCovariance::identity;
  if (s == "power_decay" || s == "S2") return NoiseCovariance::power_decay;
  throw Error(ErrorCategory::config, "unknown noise covariance '" + s + "'");
}

double spectral_radius(const Matrix& a) {
  if (a.size() == 0) return 0.0;
  Eigen::EigenSolver<Matrix> solver(a, false);
  if (solver.info() != Eigen::Success) {
    throw Error(ErrorCategory::numeric, "eigenvalue computation failed");
  }
  return solver.eigenvalues().cwiseAbs().maxCoeff();
}

Matrix make_A(VarDesign design, Index p, std::uint64_t seed) {
  if (p < 2) throw Error(ErrorCategory::config, "make_A needs p >= 2");
  Matrix a = Matrix::Zero(p, p);
  switch (design) {
    case VarDesign::none:
      break;
    case VarDesign::banded:
      // A_ij = 0.5 1{i=j} + sign(i - j) 0.4 1{|i-j| = 1}
      for (Index i = 0; i < p; ++i) {
        a(i, i) = 0.5;
        if (i > 0) a(i, i - 1) = 0.4;
        if (i + 1 < p) a(i, i + 1) = -0.4;
      }
      break;
    case VarDesign::erdos_renyi: {
      Rng rng(seed);
      const double prob = 1.0 / static_cast<double>(p);
      for (Index i = 0; i < p; ++i) {
        for (Index j = 0; j < p; ++j) {
          const bool edge = rng.bernoulli(prob);
          if (edge && i != j) a(i, j) = 0.275;
        }
      }
      const double norm = a.isZero(0.0) ? 0.0 : a.operatorNorm();
      if (norm > 0.0) a /= norm;
      break;
    }
  }
  return a;
}

Matrix draw_innovations(const Innovation& law, Index n, Index p,
                        std::uint64_t seed) {
  if (law.law == InnovationLaw::student_t && !(law.nu > 2.0)) {
    throw Error(ErrorCategory::config, "student-t innovations need nu > 2");
  }
  Rng rng(seed);
  Matrix out(n, p);
  const double t_scale =
      law.law == InnovationLaw::student_t ? std::sqrt(law.nu / (law.nu - 2.0)) : 1.0;
  const double ln_mean = std::exp(0.5);
  const double ln_sd = std::sqrt(std::exp(2.0) - std::exp(1.0));
  // Row-major fill so that a longer series extends a shorter one.
  for (Index t = 0; t < n; ++t) {
    for (Index i = 0; i < p; ++i) {
      double v = 0.0;
      switch (law.law) {
        case InnovationLaw::gaussian: v = rng.normal(); break;
        case InnovationLaw::student_t: v = rng.student_t(law.nu) / t_scale; break;
        case InnovationLaw::lognormal: v = (rng.lognormal(0.0, 1.0) - ln_mean) / ln_sd; break;
      }
      out(t, i) = v;
    }
  }
  return out;
}

Matrix symmetric_sqrt(const Matrix& sym) {
  Eigen::SelfAdjointEigenSolver<Matrix> solver(sym);
  if (solver.info() != Eigen::Success) {
    throw Error(ErrorCategory::numeric, "eigendecomposition failed");
  }
  const Vector root = solver.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  return solver.eigenvectors() * root.asDiagonal() * solver.eigenvectors().transpose();
}

Matrix power_decay_covariance(Index p, double base) {
  Matrix s(p, p);
  for (Index i = 0; i < p; ++i) {
    for (Index j = 0; j < p; ++j) {
      s(i, j) = std::pow(base, static_cast<double>(std::abs(i - j)));
    }
  }
  return s;
}

Matrix var1_path(const Matrix& A, const Matrix& burn_in, const Matrix& sample,
                 Vector* state_before_sample) {
  const Index k = A.rows();
  Vector s = Vector::Zero(k);
  for (Index t = 0; t < burn_in.rows(); ++t) {
    s = (A * s + burn_in.row(t).transpose()).eval();
  }
  if (state_before_sample) *state_before_sample = s;
  Matrix out(sample.rows(), k);
  for (Index t = 0; t < sample.rows(); ++t) {
    s = (A * s + sample.row(t).transpose()).eval();
    out.row(t) = s.transpose();
  }
  return out;
}

namespace {

// Burn-in shocks are drawn backwards from the first sample row: draw k is
// the shock k + 1 steps before the sample. A longer burn-in therefore only
// prepends older shocks and leaves the recent ones untouched.
Matrix draw_burn_in(const Innovation& law, Index steps, Index p, std::uint64_t seed) {
  return draw_innovations(law, steps, p, seed).colwise().reverse();
}

}  // namespace

FactorBlock make_factor_block(Index n, Index p, Index r, const Innovation& law,
                              std::uint64_t seed, Index burn_in) {
  if (r < 1) throw Error(ErrorCategory::config, "factor block needs r >= 1");
  FactorBlock fb;
  Rng rng(derive_seed(seed, kStreamFactorParams));
  fb.Lambda.resize(p, r);
  for (Index i = 0; i < p; ++i) {
    for (Index j = 0; j < r; ++j) fb.Lambda(i, j) = rng.normal();
  }
  Matrix d0(r, r);
  for (Index i = 0; i < r; ++i) {
    for (Index j = 0; j < r; ++j) {
      d0(i, j) = i == j ? rng.uniform(0.5, 0.8) : rng.uniform(0.0, 0.3);
    }
  }
  fb.D = 0.7 * d0 / spectral_radius(d0);
  const Matrix u_burn = draw_burn_in(law, burn_in, r, derive_seed(seed, kStreamUBurn));
  const Matrix u = draw_innovations(law, n, r, derive_seed(seed, kStreamU));
  fb.F = var1_path(fb.D, u_burn, u);
  return fb;
}

SimulatedPanel simulate_panel(const DgpSpec& spec) {
  spec.validate();
  SimulatedPanel out;
  out.A = make_A(spec.var_design, spec.p, derive_seed(spec.seed, kStreamA));
  const double rho = spectral_radius(out.A);
  if (!(rho < 1.0 - kStabilityMargin)) {
    throw Error(ErrorCategory::numeric,
                "unstable VAR design: spectral radius " + std::to_string(rho));
  }

  Matrix burn = draw_burn_in(spec.innovation, spec.burn_in, spec.p,
                             derive_seed(spec.seed, kStreamEpsBurn));
  out.eps = draw_innovations(spec.innovation, spec.n, spec.p,
                             derive_seed(spec.seed, kStreamEps));
  if (spec.sigma_eps == NoiseCovariance::power_decay) {
    const Matrix root = symmetric_sqrt(power_decay_covariance(spec.p, spec.power_decay_base));
    // Rows are e_t^T, so e_t = S^{1/2} v_t becomes v_t^T S^{1/2}.
    burn = (burn * root).eval();
    out.eps = (out.eps * root).eval();
  }
  out.xi = var1_path(out.A, burn, out.eps, &out.xi_initial);

  if (spec.factor_design == FactorDesign::var1) {
    FactorBlock fb = make_factor_block(spec.n, spec.p, spec.r, spec.innovation,
                                       spec.seed, spec.burn_in);
    out.chi = fb.F * fb.Lambda.transpose();
    // Match the per-variable sample variance of chi to that of xi.
    for (Index i = 0; i < spec.p; ++i) {
      const auto c = out.chi.col(i);
      const auto x = out.xi.col(i);
      const double vc = (c.array() - c.mean()).square().mean();
      const double vx = (x.array() - x.mean()).square().mean();
      if (vc > 0.0) {
        const double scale = std::sqrt(vx / vc);
        out.chi.col(i) *= scale;
        fb.Lambda.row(i) *= scale;
      }
    }
    out.Lambda = std::move(fb.Lambda);
    out.F = std::move(fb.F);
    out.D = std::move(fb.D);
  } else {
    out.chi = Matrix::Zero(spec.n, spec.p);
  }
  out.x = PanelSeries(out.chi + out.xi);
  return out;
}

}  // namespace favar
