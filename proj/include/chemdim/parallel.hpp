#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace chemdim {

/// Thread count used by parallel loops. 0 means "not configured", in which
/// case CHEMDIM_THREADS is consulted, then hardware concurrency.
void set_thread_count(unsigned count);
unsigned thread_count();

namespace detail {
// Set on pool workers so nested loops run inline instead of spawning more threads.
inline thread_local bool in_parallel_region = false;
}  // namespace detail

/// Runs body(i) for i in [0, count). Each index is handled by exactly one
/// thread and bodies must only write to slots owned by their index, so
/// results never depend on the thread count. The first exception thrown
/// (lowest index) is rethrown after all workers join.
template <class Body>
void parallel_for(std::size_t count, Body&& body) {
  const std::size_t workers =
      detail::in_parallel_region ? 1 : std::min<std::size_t>(thread_count(), count);
  if (workers <= 1) {
    for (std::size_t i = 0; i < count; ++i) body(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::mutex error_mutex;
  std::exception_ptr error;
  std::size_t error_index = count;
  auto run = [&] {
    const bool outer = detail::in_parallel_region;
    detail::in_parallel_region = true;
    for (std::size_t i = next.fetch_add(1); i < count; i = next.fetch_add(1)) {
      try {
        body(i);
      } catch (...) {
        std::lock_guard lock(error_mutex);
        if (i < error_index) {
          error_index = i;
          error = std::current_exception();
        }
      }
    }
    detail::in_parallel_region = outer;
  };
  std::vector<std::thread> pool;
  pool.reserve(workers - 1);
  for (std::size_t t = 1; t < workers; ++t) pool.emplace_back(run);
  run();
  for (auto& th : pool) th.join();
  if (error) std::rethrow_exception(error);
}

}  // namespace chemdim
