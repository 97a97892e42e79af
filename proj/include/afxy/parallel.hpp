// parallel.hpp -- deterministic task-level parallelism over index ranges
#pragma once

#include <functional>
#include <thread>
#include <vector>

namespace afxy {

// Runs fn(0..n-1) on up to `threads` workers (0 = hardware concurrency).
// Each index writes to its own output slot, so results never depend on the
// worker count.
inline void parallel_for(int n, int threads, const std::function<void(int)>& fn) {
  if (n <= 0) return;
  int hw = static_cast<int>(std::thread::hardware_concurrency());
  if (hw <= 0) hw = 1;
  int workers = threads > 0 ? threads : hw;
  workers = std::min(workers, n);
  if (workers <= 1) {
    for (int i = 0; i < n; ++i) fn(i);
    return;
  }
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([w, n, workers, &fn] {
      for (int i = w; i < n; i += workers) fn(i);
    });
  }
  for (auto& t : pool) t.join();
}

}  // namespace afxy
