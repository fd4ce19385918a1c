#pragma once

#include <algorithm>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace alignlab {

/// Number of worker threads used by parallel_for (at least one).
inline unsigned worker_count() { return std::max(1u, std::thread::hardware_concurrency()); }

/// Calls body(i) for i in [0, n) over contiguous chunks on worker threads. Each index is
/// visited exactly once, so results written per index are deterministic. The first exception
/// thrown by any chunk is rethrown on the caller.
template <class Body>
void parallel_for(std::size_t n, Body&& body, std::size_t min_chunk = 64) {
  const std::size_t workers = std::min<std::size_t>(worker_count(), (n + min_chunk - 1) / min_chunk);
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) body(i);
    return;
  }
  std::exception_ptr error;
  std::mutex error_mutex;
  std::vector<std::thread> threads;
  threads.reserve(workers);
  const std::size_t chunk = (n + workers - 1) / workers;
  for (std::size_t w = 0; w < workers; ++w) {
    const std::size_t lo = w * chunk, hi = std::min(n, lo + chunk);
    threads.emplace_back([&, lo, hi] {
      try {
        for (std::size_t i = lo; i < hi; ++i) body(i);
      } catch (...) {
        std::lock_guard lock(error_mutex);
        if (!error) error = std::current_exception();
      }
    });
  }
  for (auto& t : threads) t.join();
  if (error) std::rethrow_exception(error);
}

/// Maps f over items on a pool of at most worker_count() threads; output order matches input.
template <class T, class F>
auto parallel_map(const std::vector<T>& items, F&& f) {
  using R = decltype(f(items.front()));
  std::vector<R> out(items.size());
  parallel_for(items.size(), [&](std::size_t i) { out[i] = f(items[i]); }, 1);
  return out;
}

}  // namespace alignlab
