#pragma once

#include <atomic>
#include <functional>
#include <thread>
#include <vector>

namespace blsac {

// Run fn(i) for i in [0, count) on a bounded worker pool and collect results
// by index, so the merged output is in input order regardless of scheduling.
// Work items must be independent; give each its own derived seed.
template <typename Result>
std::vector<Result> parallel_map(int count, int workers,
                                 const std::function<Result(int)>& fn) {
  std::vector<Result> results(count);
  if (workers <= 1 || count <= 1) {
    for (int i = 0; i < count; ++i) results[i] = fn(i);
    return results;
  }
  std::atomic<int> next{0};
  std::vector<std::thread> pool;
  const int n_threads = std::min(workers, count);
  pool.reserve(n_threads);
  for (int t = 0; t < n_threads; ++t) {
    pool.emplace_back([&]() {
      for (int i = next.fetch_add(1); i < count; i = next.fetch_add(1)) results[i] = fn(i);
    });
  }
  for (auto& thread : pool) thread.join();
  return results;
}

}  // namespace blsac
