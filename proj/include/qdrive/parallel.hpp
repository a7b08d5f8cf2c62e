#pragma once

#include <algorithm>
#include <cstdlib>
#include <exception>
#include <string>
#include <thread>
#include <vector>

namespace qdrive {

/// Worker count from QDRIVE_JOBS, else the hardware concurrency.
inline int default_jobs() {
  if (const char* env = std::getenv("QDRIVE_JOBS")) {
    try {
      const int n = std::stoi(env);
      if (n > 0) return n;
    } catch (const std::exception&) {
    }
  }
  return static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
}

/// Calls fn(i) for i in [0, n) on up to `jobs` threads. Results must be
/// written to per-index slots by fn. The exception of the lowest failing
/// index is rethrown after all workers finish.
template <class Fn>
void parallel_for(std::size_t n, int jobs, Fn&& fn) {
  if (n == 0) return;
  const std::size_t workers = std::min<std::size_t>(n, static_cast<std::size_t>(std::max(1, jobs)));
  std::vector<std::exception_ptr> errors(n);
  auto run = [&](std::size_t w) {
    for (std::size_t i = w; i < n; i += workers) {
      try {
        fn(i);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  if (workers == 1) {
    run(0);
  } else {
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(run, w);
    for (auto& t : pool) t.join();
  }
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

}  // namespace qdrive
