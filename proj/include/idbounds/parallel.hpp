// Minimal deterministic work-sharing: results depend only on item indices
// (all randomness is counter-based), so the thread count never changes any
// number.

#ifndef IDBOUNDS_PARALLEL_HPP
#define IDBOUNDS_PARALLEL_HPP

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <functional>
#include <thread>
#include <vector>

namespace idbounds {

inline void parallel_for(std::size_t count, unsigned jobs,
                         const std::function<void(std::size_t)>& fn) {
  if (jobs <= 1 || count <= 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  jobs = std::min<unsigned>(jobs, std::thread::hardware_concurrency() > 0
                                      ? std::thread::hardware_concurrency()
                                      : 1);
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  pool.reserve(jobs);
  for (unsigned t = 0; t < jobs; ++t) {
    pool.emplace_back([&]() {
      for (std::size_t i = next.fetch_add(1); i < count; i = next.fetch_add(1)) fn(i);
    });
  }
  for (auto& th : pool) th.join();
}

}  // namespace idbounds

#endif  // IDBOUNDS_PARALLEL_HPP
