#pragma once

#include <cstddef>
#include <thread>
#include <vector>

namespace sketchkit {

// threads == 0 means "use all hardware threads"; negative is clamped to 1.
inline int resolve_threads(int threads) {
  if (threads == 0) {
    unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : static_cast<int>(hw);
  }
  return threads < 1 ? 1 : threads;
}

// Static partition of [0, n) into contiguous chunks, one per worker.  Writers
// touch disjoint ranges, and per-index work is seeded independently of the
// partition, so results are identical for any thread count.
template <typename Fn>
void parallel_for(std::size_t n, int threads, Fn&& fn) {
  const int t = resolve_threads(threads);
  if (t <= 1 || n <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  const std::size_t workers = static_cast<std::size_t>(t) < n ? static_cast<std::size_t>(t) : n;
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w) {
    const std::size_t begin = n * w / workers;
    const std::size_t end = n * (w + 1) / workers;
    pool.emplace_back([begin, end, &fn] {
      for (std::size_t i = begin; i < end; ++i) fn(i);
    });
  }
  for (auto& th : pool) th.join();
}

}  // namespace sketchkit
