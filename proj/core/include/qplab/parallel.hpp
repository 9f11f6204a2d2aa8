#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <functional>
#include <mutex>
#include <thread>
#include <vector>

namespace qplab::parallel {

// Process-wide worker count used by every grid scan. 0 means "all cores".
void set_workers(unsigned workers) noexcept;
unsigned workers() noexcept;

/// Runs body(i) for i in [0, count) on the configured number of workers.
/// Items are handed out dynamically; callers write results into slot i and
/// reduce afterwards in index order, so results never depend on scheduling.
/// The first exception thrown by any item is rethrown on the calling thread.
template <class Body>
void for_each_index(std::size_t count, Body&& body) {
  const unsigned k = workers();
  if (k <= 1 || count <= 1) {
    for (std::size_t i = 0; i < count; ++i) body(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto worker = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1, std::memory_order_relaxed);
      if (i >= count) return;
      try {
        body(i);
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
        next.store(count, std::memory_order_relaxed);
        return;
      }
    }
  };
  const std::size_t nthreads = std::min<std::size_t>(k, count);
  std::vector<std::thread> pool;
  pool.reserve(nthreads - 1);
  for (std::size_t t = 1; t < nthreads; ++t) pool.emplace_back(worker);
  worker();
  for (auto& th : pool) th.join();
  if (failure) std::rethrow_exception(failure);
}

/// Maps [0, count) to a vector of results in index order.
template <class T, class Fn>
std::vector<T> map_indices(std::size_t count, Fn&& fn) {
  std::vector<T> out(count);
  for_each_index(count, [&](std::size_t i) { out[i] = fn(i); });
  return out;
}

}  // namespace qplab::parallel
