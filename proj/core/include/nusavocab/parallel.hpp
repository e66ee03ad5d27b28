#pragma once

#include <algorithm>
#include <cstddef>
#include <exception>
#include <thread>
#include <vector>

namespace nusavocab {

/// Worker count used by the parallel helpers.
///
/// Resolution order: set_worker_count() override, then the NUSAVOCAB_THREADS
/// environment variable, then std::thread::hardware_concurrency().
std::size_t worker_count();

/// Overrides the worker count for this process; 0 clears the override.
void set_worker_count(std::size_t workers);

/// Splits [0, n) into at most worker_count() contiguous chunks and calls
/// fn(begin, end) for each, concurrently. Chunk boundaries depend only on n
/// and the worker count; callers that need thread-count independence must
/// write results by index and reduce commutatively. The exception of the
/// lowest-indexed failing chunk is rethrown.
template <typename Fn>
void parallel_for(std::size_t n, Fn&& fn) {
  if (n == 0) return;
  const std::size_t workers = std::min(worker_count(), n);
  if (workers <= 1) {
    fn(std::size_t{0}, n);
    return;
  }
  std::vector<std::exception_ptr> errors(workers);
  {
    std::vector<std::jthread> threads;
    threads.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) {
      const std::size_t begin = n * w / workers;
      const std::size_t end = n * (w + 1) / workers;
      threads.emplace_back([&fn, &errors, w, begin, end] {
        try {
          fn(begin, end);
        } catch (...) {
          errors[w] = std::current_exception();
        }
      });
    }
  }
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

}  // namespace nusavocab
