#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace favar {

/// SplitMix64 finaliser; used to derive independent stream seeds.
std::uint64_t splitmix64(std::uint64_t x) noexcept;

/// Seed for sub-stream `stream` of `master`. Replications use
/// derive_seed(master, replication) so results do not depend on scheduling.
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream) noexcept;

/// Portable random source: std::mt19937_64 bits with distribution transforms
/// implemented here, so a seed yields identical draws with any standard
/// library. Uniforms use the top 53 bits; normals use the Marsaglia polar
/// method; gammas use Marsaglia-Tsang.
class Rng {
 public:
  static constexpr std::string_view kAlgorithm =
      "mt19937_64/u53/polar-normal/marsaglia-tsang-gamma";

  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  /// Uniform on the open interval (0, 1).
  double uniform();
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  double normal();
  /// Gamma(shape, 1).
  double gamma(double shape);
  double chi_squared(double dof) { return 2.0 * gamma(0.5 * dof); }
  double student_t(double dof);
  double lognormal(double mu, double sigma);
  bool bernoulli(double prob) { return uniform() < prob; }

 private:
  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace favar
