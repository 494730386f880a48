#pragma once

#include <cstddef>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace volfeed {

// Every parallel kernel in the library takes an execution policy and is
// written so that the parallel result is bit-identical to the serial one:
// each loop iteration owns its output slot and does all of its floating
// point work in a fixed order.
enum class Exec { serial, parallel };

inline int hardware_threads() {
#ifdef _OPENMP
  return omp_get_max_threads();
#else
  return 1;
#endif
}

inline void set_thread_count(int n) {
#ifdef _OPENMP
  if (n > 0) omp_set_num_threads(n);
#else
  (void)n;
#endif
}

template <typename Fn>
void parallel_for(std::size_t n, Exec policy, Fn&& fn) {
#ifdef _OPENMP
  if (policy == Exec::parallel) {
    const auto count = static_cast<std::ptrdiff_t>(n);
#pragma omp parallel for schedule(dynamic)
    for (std::ptrdiff_t i = 0; i < count; ++i)
      fn(static_cast<std::size_t>(i));
    return;
  }
#else
  (void)policy;
#endif
  for (std::size_t i = 0; i < n; ++i) fn(i);
}

}  // namespace volfeed
