#pragma once

// Bounded-width parallel loop used for parameter sweeps, chevron columns and
// Monte-Carlo repetitions. jobs <= 1 (or no OpenMP at build time) runs the
// serial reference path; results must not depend on the schedule, so workers
// write only to their own index.

#include <exception>
#include <functional>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace entprobe {

inline int hardware_jobs() {
#ifdef _OPENMP
  return omp_get_max_threads();
#else
  return 1;
#endif
}

inline void parallel_for(int n, int jobs, const std::function<void(int)>& fn) {
#ifdef _OPENMP
  if (jobs > 1 && n > 1) {
    std::exception_ptr err;
#pragma omp parallel for schedule(dynamic) num_threads(jobs)
    for (int i = 0; i < n; ++i) {
      try {
        fn(i);
      } catch (...) {
#pragma omp critical
        if (!err) err = std::current_exception();
      }
    }
    if (err) std::rethrow_exception(err);
    return;
  }
#else
  (void)jobs;
#endif
  for (int i = 0; i < n; ++i) fn(i);
}

}  // namespace entprobe
