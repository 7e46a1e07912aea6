#pragma once

#include <atomic>
#include <cstdint>
#include <exception>
#include <functional>
#include <thread>
#include <vector>

namespace rarebasis {

struct ParallelOptions {
  int degree = 1;  // worker count; 1 = run inline on the calling thread
};

// Index-parallel loop with deterministic results: fn(i) must write only to
// slot i of caller-owned storage, so the outcome is independent of the
// worker count and of scheduling. The first exception (lowest index) is
// rethrown after all workers join.
template <typename Fn>
void parallel_for_index(std::int64_t n, const ParallelOptions& opts, Fn&& fn) {
  if (n <= 0) return;
  const int degree = opts.degree;
  if (degree <= 1 || n == 1) {
    for (std::int64_t i = 0; i < n; ++i) fn(i);
    return;
  }
  const int workers = static_cast<int>(std::min<std::int64_t>(degree, n));
  std::atomic<std::int64_t> next{0};
  std::vector<std::exception_ptr> errors(static_cast<std::size_t>(n));
  std::atomic<bool> failed{false};
  auto body = [&]() {
    for (;;) {
      const std::int64_t i = next.fetch_add(1, std::memory_order_relaxed);
      if (i >= n) return;
      if (failed.load(std::memory_order_relaxed)) continue;  // drain remaining indices
      try {
        fn(i);
      } catch (...) {
        errors[static_cast<std::size_t>(i)] = std::current_exception();
        failed.store(true, std::memory_order_relaxed);
      }
    }
  };
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(workers));
  for (int w = 0; w < workers; ++w) pool.emplace_back(body);
  for (auto& t : pool) t.join();
  if (failed.load()) {
    for (auto& e : errors) {
      if (e) std::rethrow_exception(e);  // lowest index wins: deterministic
    }
  }
}

// Stateless per-index random stream; identical for every worker count.
inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

}  // namespace rarebasis
