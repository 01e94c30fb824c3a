#pragma once

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <functional>
#include <thread>
#include <vector>

#include "prunelab/common.hpp"

namespace prunelab {

/// Process-wide worker count. Results never depend on it: every parallel
/// construct in this codebase assigns disjoint index ranges to workers and
/// combines partial results in index order, so serial and parallel runs are
/// bit-identical.
inline int& num_threads_ref() {
  static int n = 1;
  return n;
}
inline void set_num_threads(int n) { num_threads_ref() = std::max(1, n); }
inline int num_threads() { return num_threads_ref(); }

/// Runs fn(i) for i in [0, n). Each i must write only state owned by i.
template <typename Fn>
void parallel_for(Index n, Fn&& fn) {
  const int threads = std::min<Index>(num_threads(), n);
  if (threads <= 1) {
    for (Index i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<Index> next{0};
  auto worker = [&] {
    for (;;) {
      Index i = next.fetch_add(1);
      if (i >= n) return;
      fn(i);
    }
  };
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(threads) - 1);
  for (int t = 1; t < threads; ++t) pool.emplace_back(worker);
  worker();
  for (auto& th : pool) th.join();
}

}  // namespace prunelab
