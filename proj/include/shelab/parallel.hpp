#pragma once

// Minimal deterministic fork-join helper.  Work items are indexed; each
// worker owns a contiguous block of indices and writes only to slots derived
// from the index, so results never depend on the worker count.  Reductions
// are performed serially by the caller after the join.

#include <algorithm>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace shelab {

// 0 means "use the hardware concurrency".
inline int resolve_workers(int requested) {
  if (requested > 0) return requested;
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : static_cast<int>(hw);
}

// Calls body(i, worker_id) for i in [0, n).  worker_id is in [0, workers) and
// may be used to select per-thread scratch space.  Exceptions thrown by the
// body are captured and the first one is rethrown after the join.
template <typename Body>
inline void parallel_for(std::size_t n, int workers, const Body& body) {
  workers = std::max(1, std::min<int>(resolve_workers(workers),
                                      n == 0 ? 1 : static_cast<int>(std::min<std::size_t>(n, 1u << 16))));
  if (workers == 1) {
    for (std::size_t i = 0; i < n; ++i) body(i, 0);
    return;
  }
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(workers));
  std::mutex err_mutex;
  std::exception_ptr first_error;
  const std::size_t chunk = (n + static_cast<std::size_t>(workers) - 1) /
                            static_cast<std::size_t>(workers);
  for (int w = 0; w < workers; ++w) {
    const std::size_t begin = std::min(n, static_cast<std::size_t>(w) * chunk);
    const std::size_t end = std::min(n, begin + chunk);
    if (begin >= end) break;
    pool.emplace_back([&, begin, end, w]() {
      try {
        for (std::size_t i = begin; i < end; ++i) body(i, w);
      } catch (...) {
        std::lock_guard<std::mutex> lock(err_mutex);
        if (!first_error) first_error = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  if (first_error) std::rethrow_exception(first_error);
}

}  // namespace shelab
