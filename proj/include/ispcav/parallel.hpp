#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace ispcav {

/// Worker count; 0 means hardware concurrency.
inline unsigned resolve_workers(unsigned workers) {
  if (workers != 0) return workers;
  return std::max(1u, std::thread::hardware_concurrency());
}

/// out[k] = fn(k) for k in [0, count). Each index is evaluated independently,
/// so the output does not depend on the number of workers.
template <typename T, typename Fn>
std::vector<T> parallel_map(std::size_t count, Fn&& fn, unsigned workers = 0) {
  std::vector<T> out(count);
  const unsigned nthreads = static_cast<unsigned>(std::min<std::size_t>(resolve_workers(workers), count));
  if (nthreads <= 1) {
    for (std::size_t k = 0; k < count; ++k) out[k] = fn(k);
    return out;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  std::vector<std::jthread> pool;
  pool.reserve(nthreads);
  for (unsigned t = 0; t < nthreads; ++t) {
    pool.emplace_back([&] {
      for (std::size_t k = next++; k < count; k = next++) {
        try {
          out[k] = fn(k);
        } catch (...) {
          std::lock_guard lock(error_mutex);
          if (!error) error = std::current_exception();
          next = count;
        }
      }
    });
  }
  pool.clear();
  if (error) std::rethrow_exception(error);
  return out;
}

}  // namespace ispcav
