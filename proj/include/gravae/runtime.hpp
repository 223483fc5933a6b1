#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <functional>
#include <mutex>
#include <thread>
#include <vector>

namespace gravae {

// Worker count for parallel loops. 0 = use hardware_concurrency.
inline int& thread_count_ref() {
  static int count = 0;
  return count;
}

inline void set_thread_count(int n) { thread_count_ref() = n; }

inline int effective_threads() {
  int n = thread_count_ref();
  if (n > 0) return n;
  unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : static_cast<int>(hw);
}

// Fixed chunk grid so that reduction order (and therefore floating point
// output) does not depend on the worker count. Chunks are claimed by an
// atomic counter; results indexed by chunk id must be combined in chunk
// order by the caller.
inline constexpr std::size_t kParallelChunks = 128;

// Runs fn(begin, end, chunk_id) over a partition of [0, n) into at most
// kParallelChunks contiguous ranges. Exceptions from workers are rethrown.
inline void parallel_for(std::size_t n,
                         const std::function<void(std::size_t, std::size_t,
                                                  std::size_t)>& fn) {
  if (n == 0) return;
  std::size_t chunks = std::min<std::size_t>(n, kParallelChunks);
  std::size_t base = n / chunks, rem = n % chunks;
  auto bounds = [&](std::size_t c) {
    std::size_t lo = c * base + std::min(c, rem);
    std::size_t hi = lo + base + (c < rem ? 1 : 0);
    return std::pair<std::size_t, std::size_t>(lo, hi);
  };
  int workers = std::min<int>(effective_threads(), static_cast<int>(chunks));
  if (workers <= 1) {
    for (std::size_t c = 0; c < chunks; ++c) {
      auto [lo, hi] = bounds(c);
      fn(lo, hi, c);
    }
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr err;
  std::mutex err_mu;
  auto work = [&] {
    for (;;) {
      std::size_t c = next.fetch_add(1);
      if (c >= chunks) return;
      auto [lo, hi] = bounds(c);
      try {
        fn(lo, hi, c);
      } catch (...) {
        std::lock_guard<std::mutex> lock(err_mu);
        if (!err) err = std::current_exception();
        return;
      }
    }
  };
  std::vector<std::thread> pool;
  pool.reserve(workers - 1);
  for (int t = 1; t < workers; ++t) pool.emplace_back(work);
  work();
  for (auto& th : pool) th.join();
  if (err) std::rethrow_exception(err);
}

}  // namespace gravae
