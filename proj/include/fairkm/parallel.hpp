#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdlib>
#include <string>
#include <thread>
#include <vector>

namespace fairkm {

// Worker count: FAIRKM_THREADS if set to a positive integer, otherwise the
// hardware concurrency (at least 1).
inline std::size_t thread_budget() {
  if (const char* env = std::getenv("FAIRKM_THREADS")) {
    try {
      const long v = std::stol(env);
      if (v > 0) return static_cast<std::size_t>(v);
    } catch (...) {
    }
  }
  return std::max<std::size_t>(1, std::thread::hardware_concurrency());
}

// Calls body(i) for every i in [0, count) across contiguous chunks. body
// must only write to per-index state; results are then independent of the
// thread count.
template <typename Body>
void parallel_for(std::size_t count, Body&& body,
                  std::size_t threads = thread_budget()) {
  threads = std::min(threads, count / 256 + 1);
  if (threads <= 1) {
    for (std::size_t i = 0; i < count; ++i) body(i);
    return;
  }
  std::vector<std::jthread> pool;
  pool.reserve(threads);
  const std::size_t chunk = (count + threads - 1) / threads;
  for (std::size_t t = 0; t < threads; ++t) {
    const std::size_t lo = t * chunk;
    const std::size_t hi = std::min(count, lo + chunk);
    if (lo >= hi) break;
    pool.emplace_back([lo, hi, &body] {
      for (std::size_t i = lo; i < hi; ++i) body(i);
    });
  }
}

}  // namespace fairkm
