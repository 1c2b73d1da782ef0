#pragma once

#include <cstddef>
#include <thread>
#include <vector>

namespace gridsynth {

inline int resolve_threads(int requested) {
  if (requested > 0) return requested;
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : static_cast<int>(hw);
}

// Runs fn(begin, end) over disjoint chunks of [0, total). Chunk boundaries
// depend only on (total, threads); workers write to disjoint state, so
// results are identical for any thread count.
template <typename Fn>
void parallel_chunks(std::size_t total, int threads, Fn&& fn) {
  threads = resolve_threads(threads);
  if (total == 0) return;
  const std::size_t n = static_cast<std::size_t>(threads) < total
                            ? static_cast<std::size_t>(threads)
                            : total;
  if (n <= 1) {
    fn(std::size_t{0}, total);
    return;
  }
  std::vector<std::thread> pool;
  pool.reserve(n);
  const std::size_t step = (total + n - 1) / n;
  for (std::size_t c = 0; c < n; ++c) {
    const std::size_t begin = c * step;
    const std::size_t end = begin + step < total ? begin + step : total;
    if (begin >= end) break;
    pool.emplace_back([&fn, begin, end] { fn(begin, end); });
  }
  for (auto& t : pool) t.join();
}

}  // namespace gridsynth
