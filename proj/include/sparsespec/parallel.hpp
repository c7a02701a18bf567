#pragma once

#include <cstddef>
#include <exception>
#include <mutex>

namespace sparsespec {

/// Caps the number of OpenMP threads used by the parallel kernels.
/// Values < 1 restore the runtime default.
void set_num_threads(int threads);
int num_threads();

/// Restores the previous thread cap on destruction.
class ScopedThreads {
 public:
  explicit ScopedThreads(int threads) : previous_(num_threads()) { set_num_threads(threads); }
  ~ScopedThreads() { set_num_threads(previous_); }
  ScopedThreads(const ScopedThreads&) = delete;
  ScopedThreads& operator=(const ScopedThreads&) = delete;

 private:
  int previous_;
};

/// Runs body(i) for i in [0, n), concurrently when `parallel` is set. If any
/// call throws, the exception of the lowest failing index is rethrown after
/// the loop.
template <typename Body>
void parallel_for(std::ptrdiff_t n, bool parallel, Body&& body) {
  std::exception_ptr error;
  std::ptrdiff_t error_index = n;
  std::mutex guard;
#pragma omp parallel for schedule(dynamic) if (parallel)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    try {
      body(i);
    } catch (...) {
      std::lock_guard<std::mutex> lock(guard);
      if (i < error_index) {
        error_index = i;
        error = std::current_exception();
      }
    }
  }
  if (error) std::rethrow_exception(error);
}

}  // namespace sparsespec
