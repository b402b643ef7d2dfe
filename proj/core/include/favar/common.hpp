#pragma once

#include <cstddef>
#include <functional>
#include <stdexcept>
#include <string>
#include <string_view>

#include <Eigen/Dense>

namespace favar {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Index = Eigen::Index;

/// Coarse error classes. The CLI prints the category as the first token of
/// its one-line error report, so the names are part of the external surface.
enum class ErrorCategory {
  input,        // malformed or inconsistent user data
  config,       // invalid options / flags
  numeric,      // rank deficiency, singular matrices, unstable designs
  convergence,  // iterative solver did not converge
  io,           // filesystem failures
};

std::string_view to_string(ErrorCategory c) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorCategory category, const std::string& what)
      : std::runtime_error(what), category_(category) {}

  ErrorCategory category() const noexcept { return category_; }

 private:
  ErrorCategory category_;
};

/// Rethrows `e` with `stage` prepended to the message, keeping the category.
[[noreturn]] void rethrow_with_stage(std::string_view stage, const Error& e);

/// Runs fn(i) for i in [0, n) on up to `threads` workers. Work items are
/// assigned by index so results written to slot i do not depend on
/// scheduling. The first exception thrown by any item is rethrown.
void parallel_for(std::size_t n, std::size_t threads,
                  const std::function<void(std::size_t)>& fn);

/// Resolves a thread count request: 0 means hardware concurrency.
std::size_t resolve_threads(std::size_t requested) noexcept;

}  // namespace favar
