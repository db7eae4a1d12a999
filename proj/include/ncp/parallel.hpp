#pragma once

#include <algorithm>
#include <exception>
#include <functional>
#include <mutex>
#include <thread>
#include <vector>

namespace ncp {

// Static-chunked parallel loop. Work items must be independent and write to
// disjoint slots so results never depend on the schedule. threads <= 1 runs
// inline. The first exception thrown by a worker is rethrown on the caller.
inline void parallel_for(int begin, int end, int threads, const std::function<void(int)>& body) {
  const int count = end - begin;
  if (count <= 0) return;
  if (threads <= 0) threads = static_cast<int>(std::thread::hardware_concurrency());
  threads = std::max(1, std::min(threads, count));
  if (threads == 1) {
    for (int i = begin; i < end; ++i) body(i);
    return;
  }

  std::mutex err_mutex;
  std::exception_ptr first_error;
  std::vector<std::thread> pool;
  pool.reserve(threads);
  for (int t = 0; t < threads; ++t) {
    pool.emplace_back([&, t]() {
      try {
        for (int i = begin + t; i < end; i += threads) body(i);
      } catch (...) {
        std::scoped_lock lock(err_mutex);
        if (!first_error) first_error = std::current_exception();
      }
    });
  }
  for (auto& th : pool) th.join();
  if (first_error) std::rethrow_exception(first_error);
}

}  // namespace ncp
