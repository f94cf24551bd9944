#pragma once

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <exception>
#include <functional>
#include <mutex>
#include <thread>
#include <vector>

namespace afbench {

/// Effective worker count: a positive request wins, else the AFBENCH_JOBS
/// environment variable, else 1.
inline int resolve_jobs(int requested) {
  if (requested > 0) {
    return requested;
  }
  if (const char* env = std::getenv("AFBENCH_JOBS")) {
    const int v = std::atoi(env);
    if (v > 0) {
      return v;
    }
  }
  return 1;
}

/**
 * Run fn(0..count-1) on up to `jobs` threads. Work items are claimed from a
 * shared counter; the first exception is captured and rethrown after all
 * workers finish. Callers are responsible for making fn's side effects
 * order-independent (e.g. writing to index-addressed slots).
 */
inline void parallel_for(size_t count, int jobs,
                         const std::function<void(size_t)>& fn) {
  jobs = resolve_jobs(jobs);
  if (jobs <= 1 || count <= 1) {
    for (size_t i = 0; i < count; ++i) {
      fn(i);
    }
    return;
  }
  std::atomic<size_t> next{0};
  std::atomic<bool> failed{false};
  std::exception_ptr error;
  std::mutex error_mu;
  auto worker = [&]() {
    while (!failed.load(std::memory_order_relaxed)) {
      const size_t i = next.fetch_add(1);
      if (i >= count) {
        break;
      }
      try {
        fn(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mu);
        if (!error) {
          error = std::current_exception();
        }
        failed.store(true, std::memory_order_relaxed);
      }
    }
  };
  std::vector<std::thread> threads;
  const size_t n_threads = std::min<size_t>(static_cast<size_t>(jobs), count);
  threads.reserve(n_threads);
  for (size_t t = 0; t < n_threads; ++t) {
    threads.emplace_back(worker);
  }
  for (auto& t : threads) {
    t.join();
  }
  if (error) {
    std::rethrow_exception(error);
  }
}

}  // namespace afbench
