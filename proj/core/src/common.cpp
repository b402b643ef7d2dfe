#include "favar/common.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace favar {

std::string_view to_string(ErrorCategory c) noexcept {
  switch (c) {
    case ErrorCategory::input: return "input";
    case ErrorCategory::config: return "config";
    case ErrorCategory::numeric: return "numeric";
    case ErrorCategory::convergence: return "convergence";
    case ErrorCategory::io: return "io";
  }
  return "unknown";
}

void rethrow_with_stage(std::string_view stage, const Error& e) {
  throw Error(e.category(), std::string(stage) + ": " + e.what());
}

std::size_t resolve_threads(std::size_t requested) noexcept {
  if (requested > 0) return requested;
  const auto hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : hw;
}

void parallel_for(std::size_t n, std::size_t threads,
                  const std::function<void(std::size_t)>& fn) {
  threads = std::min(resolve_threads(threads), n);
  if (threads <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }

  std::atomic<std::size_t> next{0};
  // Items are claimed in increasing index order, so every index below a
  // failing one has already been claimed; reporting the lowest failing index
  // keeps the surfaced error independent of scheduling.
  std::exception_ptr first_error;
  std::size_t first_error_index = n;
  std::mutex error_mutex;

  auto worker = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= n) return;
      try {
        fn(i);
      } catch (...) {
        std::lock_guard lock(error_mutex);
        if (i < first_error_index) {
          first_error_index = i;
          first_error = std::current_exception();
        }
        next.store(n);
        return;
      }
    }
  };

  std::vector<std::jthread> pool;
  pool.reserve(threads);
  for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(worker);
  pool.clear();  // joins

  if (first_error) std::rethrow_exception(first_error);
}

}  // namespace favar
