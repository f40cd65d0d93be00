#pragma once

#include <algorithm>
#include <cstdlib>
#include <functional>
#include <thread>
#include <vector>

namespace gdl {

// Worker count: GDL_THREADS caps it when set, otherwise hardware concurrency.
inline int thread_budget() {
  int hw = static_cast<int>(std::thread::hardware_concurrency());
  if (hw <= 0) hw = 1;
  if (const char* env = std::getenv("GDL_THREADS")) {
    const int cap = std::atoi(env);
    if (cap >= 1) return std::min(hw, cap);
  }
  return hw;
}

// Runs fn(row) for every row in [0, n_rows) on a static block partition.
// Rows own disjoint output, so results do not depend on the thread count.
inline void parallel_rows(int n_rows, const std::function<void(int)>& fn) {
  const int workers = std::min(thread_budget(), n_rows);
  if (workers <= 1) {
    for (int r = 0; r < n_rows; ++r) fn(r);
    return;
  }
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      for (int r = w; r < n_rows; r += workers) fn(r);
    });
  }
  for (auto& t : pool) t.join();
}

}  // namespace gdl
