#pragma once

#include <exception>
#include <mutex>

namespace trussred::detail {

// OpenMP loop over [begin, end) that rethrows the first exception raised by
// body on the calling thread. Nested calls run serially.
template <typename Body>
void parallel_for(long begin, long end, Body&& body) {
  std::exception_ptr error;
  std::mutex error_mutex;
#pragma omp parallel for schedule(dynamic)
  for (long i = begin; i < end; ++i) {
    try {
      body(i);
    } catch (...) {
      std::lock_guard lock(error_mutex);
      if (!error) error = std::current_exception();
    }
  }
  if (error) std::rethrow_exception(error);
}

}  // namespace trussred::detail
