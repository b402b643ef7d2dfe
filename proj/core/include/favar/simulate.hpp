#pragma once

#include <cstdint>
#include <string>

#include "favar/common.hpp"
#include "favar/panel.hpp"

namespace favar {

enum class VarDesign { none, banded, erdos_renyi };       // V0, V1, V2
enum class InnovationLaw { gaussian, student_t, lognormal };  // I1, I2, I3
enum class FactorDesign { none, var1 };                    // F2, F1
enum class NoiseCovariance { identity, power_decay };      // S1, S2

struct Innovation {
  InnovationLaw law = InnovationLaw::gaussian;
  double nu = 3.0;  // student_t only, must exceed 2

  static Innovation gaussian() { return {}; }
  static Innovation student(double nu) { return {InnovationLaw::student_t, nu}; }
  static Innovation lognormal() { return {InnovationLaw::lognormal, 0.0}; }
};

struct DgpSpec {
  Index n = 100;
  Index p = 50;
  VarDesign var_design = VarDesign::banded;
  Innovation innovation;
  FactorDesign factor_design = FactorDesign::none;
  Index r = 3;  // factor number under FactorDesign::var1
  NoiseCovariance sigma_eps = NoiseCovariance::identity;
  double power_decay_base = 0.9;
  Index burn_in = 500;
  std::uint64_t seed = 1;

  void validate() const;
};

/// Short names used by config files and CLI flags
/// (e.g. "banded", "t", "var1", "power_decay").
std::string to_string(VarDesign v);
std::string to_string(InnovationLaw v);
std::string to_string(FactorDesign v);
std::string to_string(NoiseCovariance v);
VarDesign parse_var_design(const std::string& s);
InnovationLaw parse_innovation_law(const std::string& s);
FactorDesign parse_factor_design(const std::string& s);
NoiseCovariance parse_noise_covariance(const std::string& s);

/// VAR(1) transition matrix. Banded: 0.5 on the diagonal, +0.4 below and
/// -0.4 above it. Erdos-Renyi: directed edges (no self-loops) with
/// probability 1/p, weight 0.275, then divided by the spectral norm.
Matrix make_A(VarDesign design, Index p, std::uint64_t seed);

/// Largest eigenvalue modulus.
double spectral_radius(const Matrix& a);

/// n x p matrix of iid zero-mean unit-variance draws.
Matrix draw_innovations(const Innovation& law, Index n, Index p,
                        std::uint64_t seed);

/// Symmetric square root of a PSD matrix.
Matrix symmetric_sqrt(const Matrix& sym);

/// [c^{|i-j|}]
Matrix power_decay_covariance(Index p, double base);

/// Runs s_t = A s_{t-1} + e_t from s_0 = 0 through the burn-in rows and then
/// the sample rows; returns the sample part (rows of `sample`).
Matrix var1_path(const Matrix& A, const Matrix& burn_in, const Matrix& sample,
                 Vector* state_before_sample = nullptr);

struct FactorBlock {
  Matrix Lambda;  // p x r
  Matrix F;       // n x r
  Matrix D;       // r x r
};

/// Loadings iid N(0,1); D = 0.7 D0 / rho(D0) with diag(D0) ~ U[0.5, 0.8] and
/// off-diagonal ~ U[0, 0.3]; F_t = D F_{t-1} + u_t.
FactorBlock make_factor_block(Index n, Index p, Index r, const Innovation& law,
                              std::uint64_t seed, Index burn_in = 500);

struct SimulatedPanel {
  PanelSeries x;
  Matrix A;
  Matrix Lambda;
  Matrix F;
  Matrix D;
  Matrix chi;
  Matrix xi;
  Matrix eps;          // innovations driving xi over the sample
  Vector xi_initial;   // xi state just before the first sample row
};

SimulatedPanel simulate_panel(const DgpSpec& spec);

}  // namespace favar
