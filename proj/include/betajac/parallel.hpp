#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace betajac {

// Thread count actually used for a hint: nonpositive means hardware
// concurrency, and never more workers than tasks.
inline int resolve_threads(int hint, std::size_t tasks) {
  int t = hint > 0 ? hint : static_cast<int>(std::thread::hardware_concurrency());
  if (t < 1) t = 1;
  if (tasks < static_cast<std::size_t>(t)) t = static_cast<int>(std::max<std::size_t>(tasks, 1));
  return t;
}

// Calls body(i) for i in [0, count). Work is handed out dynamically, so the
// body must write only to slot i; results are then identical for every
// thread count. The exception of the lowest failing index is rethrown.
template <class Body>
void parallel_for(std::size_t count, int threads_hint, Body&& body) {
  const int threads = resolve_threads(threads_hint, count);
  if (threads == 1) {
    for (std::size_t i = 0; i < count; ++i) body(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::mutex error_mutex;
  std::size_t error_index = count;
  std::exception_ptr error;
  auto worker = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= count) return;
      try {
        body(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (i < error_index) {
          error_index = i;
          error = std::current_exception();
        }
      }
    }
  };
  std::vector<std::thread> pool;
  pool.reserve(threads);
  for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
  for (auto& th : pool) th.join();
  if (error) std::rethrow_exception(error);
}

}  // namespace betajac
