#pragma once

#include <cstdlib>
#include <exception>
#include <functional>
#include <string>
#include <thread>
#include <vector>

namespace lamfem {

// Worker count: LAMFEM_THREADS if set, otherwise 1. Results are required to
// be independent of this value (workers write disjoint slots; any reduction
// happens serially afterwards).
inline int thread_count() {
  if (const char* env = std::getenv("LAMFEM_THREADS")) {
    const int n = std::atoi(env);
    if (n >= 1) return n;
  }
  return 1;
}

// Static block partition of [0, n). On worker exceptions, the one thrown by
// the lowest-indexed block is rethrown so failures are deterministic too.
inline void parallel_for(int n, const std::function<void(int)>& body,
                         int n_threads = thread_count()) {
  if (n <= 0) return;
  if (n_threads <= 1 || n == 1) {
    for (int i = 0; i < n; ++i) body(i);
    return;
  }

  n_threads = std::min(n_threads, n);
  std::vector<std::exception_ptr> errors(static_cast<std::size_t>(n_threads));
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(n_threads));

  const int chunk = (n + n_threads - 1) / n_threads;
  for (int t = 0; t < n_threads; ++t) {
    const int lo = t * chunk;
    const int hi = std::min(n, lo + chunk);
    pool.emplace_back([&, t, lo, hi] {
      try {
        for (int i = lo; i < hi; ++i) body(i);
      } catch (...) {
        errors[static_cast<std::size_t>(t)] = std::current_exception();
      }
    });
  }
  for (auto& th : pool) th.join();
  for (const auto& e : errors)
    if (e) std::rethrow_exception(e);
}

} // namespace lamfem
