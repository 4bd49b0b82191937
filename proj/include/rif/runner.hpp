#pragma once

#include <atomic>
#include <cstdint>
#include <functional>
#include <thread>
#include <vector>

namespace rif {

// Replica-parallel map with deterministic aggregation: results land in a
// replica-indexed vector, so the reduction order (and output bytes) never
// depend on the thread count.
template <class Result, class Fn>
std::vector<Result> run_replicas(uint64_t reps, Fn fn, unsigned threads = 0) {
  if (threads == 0) {
    const unsigned hw = std::thread::hardware_concurrency();
    threads = hw == 0 ? 1 : hw;
  }
  std::vector<Result> out(reps);
  if (threads <= 1 || reps <= 1) {
    for (uint64_t r = 0; r < reps; ++r) out[r] = fn(r);
    return out;
  }
  std::atomic<uint64_t> next{0};
  std::vector<std::thread> pool;
  pool.reserve(threads);
  for (unsigned t = 0; t < threads; ++t) {
    pool.emplace_back([&]() {
      while (true) {
        const uint64_t r = next.fetch_add(1);
        if (r >= reps) return;
        out[r] = fn(r);
      }
    });
  }
  for (auto& th : pool) th.join();
  return out;
}

}  // namespace rif
