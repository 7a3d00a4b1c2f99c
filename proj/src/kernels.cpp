// SPDX-License-Identifier: Apache-2.0
#include "effsearch/kernels.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace effsearch {

int max_threads() {
#ifdef _OPENMP
  return omp_get_max_threads();
#else
  return 1;
#endif
}

namespace kernels {

std::vector<std::uint8_t> dominance_matrix_serial(
    std::size_t n, const std::function<bool(std::size_t, std::size_t)>& dominates) {
  std::vector<std::uint8_t> m(n * n, 0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      if (i != j && dominates(i, j)) m[i * n + j] = 1;
  return m;
}

std::vector<std::uint8_t> dominance_matrix_parallel(
    std::size_t n, const std::function<bool(std::size_t, std::size_t)>& dominates) {
  std::vector<std::uint8_t> m(n * n, 0);
  const auto count = static_cast<long long>(n);
#pragma omp parallel for schedule(dynamic, 8)
  for (long long ii = 0; ii < count; ++ii) {
    const auto i = static_cast<std::size_t>(ii);
    for (std::size_t j = 0; j < n; ++j)
      if (i != j && dominates(i, j)) m[i * n + j] = 1;
  }
  return m;
}

}  // namespace kernels
}  // namespace effsearch
