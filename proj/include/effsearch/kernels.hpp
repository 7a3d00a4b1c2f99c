// SPDX-License-Identifier: Apache-2.0
//
// Data-parallel kernels. Every OpenMP kernel has a serial twin with the same
// contract; results are written by index, so both produce identical output.
#pragma once

#include <cstddef>
#include <cstdint>
#include <exception>
#include <functional>
#include <mutex>
#include <span>
#include <vector>

namespace effsearch {

enum class Exec { Serial, Parallel };

/// Number of OpenMP threads available (1 without OpenMP).
int max_threads();

namespace kernels {

/// out[i] = fn(i) for i in [0, n).
template <typename T>
void map_index_serial(std::size_t n, std::span<T> out, const std::function<T(std::size_t)>& fn) {
  for (std::size_t i = 0; i < n; ++i) out[i] = fn(i);
}

/// Exceptions thrown by `fn` are rethrown after the loop; the one from the
/// lowest index wins, as in the serial version.
template <typename T>
void map_index_parallel(std::size_t n, std::span<T> out, const std::function<T(std::size_t)>& fn) {
  const auto count = static_cast<long long>(n);
  std::mutex mu;
  std::size_t failed_at = n;
  std::exception_ptr error;
#pragma omp parallel for schedule(dynamic, 16)
  for (long long i = 0; i < count; ++i) {
    const auto k = static_cast<std::size_t>(i);
    try {
      out[k] = fn(k);
    } catch (...) {
      std::lock_guard lock(mu);
      if (k < failed_at) {
        failed_at = k;
        error = std::current_exception();
      }
    }
  }
  if (error) std::rethrow_exception(error);
}

template <typename T>
std::vector<T> map_index(std::size_t n, Exec exec, const std::function<T(std::size_t)>& fn) {
  std::vector<T> out(n);
  if (exec == Exec::Parallel)
    map_index_parallel<T>(n, out, fn);
  else
    map_index_serial<T>(n, out, fn);
  return out;
}

/// Row-major n x n matrix with m[i * n + j] = dominates(i, j). `dominates`
/// must be thread-safe.
std::vector<std::uint8_t> dominance_matrix_serial(
    std::size_t n, const std::function<bool(std::size_t, std::size_t)>& dominates);
std::vector<std::uint8_t> dominance_matrix_parallel(
    std::size_t n, const std::function<bool(std::size_t, std::size_t)>& dominates);

}  // namespace kernels
}  // namespace effsearch
