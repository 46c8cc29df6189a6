#pragma once

#include <algorithm>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace ctgi {

/// Worker count for internal parallel loops. 0 selects the hardware
/// concurrency. Results never depend on this value.
struct Parallelism {
  unsigned workers = 0;

  unsigned resolved() const {
    if (workers > 0) return workers;
    return std::max(1u, std::thread::hardware_concurrency());
  }
};

/// Calls body(begin, end) over contiguous chunks of [0, count). Every index is
/// visited by exactly one chunk; the first exception thrown is rethrown.
template <typename Body>
void parallel_for(std::size_t count, Parallelism par, Body&& body) {
  if (count == 0) return;
  const std::size_t workers =
      std::min<std::size_t>(par.resolved(), count);
  if (workers <= 1) {
    body(std::size_t{0}, count);
    return;
  }
  std::vector<std::thread> threads;
  threads.reserve(workers);
  std::exception_ptr failure;
  std::mutex failure_mutex;
  const std::size_t chunk = (count + workers - 1) / workers;
  for (std::size_t w = 0; w < workers; ++w) {
    const std::size_t begin = w * chunk;
    const std::size_t end = std::min(count, begin + chunk);
    if (begin >= end) break;
    threads.emplace_back([&, begin, end] {
      try {
        body(begin, end);
      } catch (...) {
        std::lock_guard<std::mutex> lock(failure_mutex);
        if (!failure) failure = std::current_exception();
      }
    });
  }
  for (auto& t : threads) t.join();
  if (failure) std::rethrow_exception(failure);
}

}  // namespace ctgi
