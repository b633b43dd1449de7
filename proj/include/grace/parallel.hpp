#pragma once

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

#include "grace/core.hpp"

namespace grace {

/// Worker count from GRACE_INFER_THREADS, else the hardware concurrency.
inline int default_thread_count() {
  if (const char* env = std::getenv("GRACE_INFER_THREADS")) {
    const int n = std::atoi(env);
    if (n > 0) return n;
  }
  return static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
}

/// Runs body(i) for i in [0, count) on up to `threads` workers. Each index
/// must write only its own output slot; with threads == 1 the loop runs in
/// order on the calling thread. The exception thrown by the lowest failing
/// index is rethrown.
template <class Body>
void parallel_for(Index count, int threads, Body&& body) {
  if (threads <= 1 || count <= 1) {
    for (Index i = 0; i < count; ++i) body(i);
    return;
  }
  std::atomic<Index> next{0};
  std::mutex guard;
  Index failed_index = count;
  std::exception_ptr failure;
  auto worker = [&] {
    for (Index i = next++; i < count; i = next++) {
      try {
        body(i);
      } catch (...) {
        std::lock_guard lock(guard);
        if (i < failed_index) {
          failed_index = i;
          failure = std::current_exception();
        }
      }
    }
  };
  const auto n = static_cast<int>(std::min<Index>(threads, count));
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(n));
  for (int t = 0; t < n; ++t) pool.emplace_back(worker);
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
}

}  // namespace grace
