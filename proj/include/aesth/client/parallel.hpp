#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace aesth {

/// Calls fn(i) for every i in [0, n) on at most `limit` threads. Results are
/// the caller's to place by index, so output order never depends on
/// scheduling. The first exception stops new work and is rethrown after all
/// workers finish.
template <class Fn>
void parallel_for(std::size_t n, int limit, Fn&& fn) {
  if (n == 0) return;
  const std::size_t workers = std::min<std::size_t>(n, static_cast<std::size_t>(std::max(1, limit)));
  if (workers == 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::atomic<bool> stop{false};
  std::exception_ptr error;
  std::size_t error_index = n;
  std::mutex error_mu;

  auto work = [&] {
    for (;;) {
      if (stop.load()) return;
      std::size_t i = next.fetch_add(1);
      if (i >= n) return;
      try {
        fn(i);
      } catch (...) {
        std::lock_guard lock(error_mu);
        // Report the lowest failing index for a stable error message.
        if (i < error_index) {
          error_index = i;
          error = std::current_exception();
        }
        stop.store(true);
      }
    }
  };
  std::vector<std::jthread> pool;
  pool.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(work);
  pool.clear();
  if (error) std::rethrow_exception(error);
}

}  // namespace aesth
