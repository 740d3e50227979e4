#pragma once

#if defined(_OPENMP)
#include <omp.h>
#endif

namespace slitflow {

/// Thread budget for the data-parallel kernels.  Every kernel has a
/// plain serial loop (n_threads == 1) and an OpenMP twin; outputs are
/// written by index, so results are identical bit for bit regardless of
/// the thread count.
struct ExecPolicy {
  int n_threads = 0;  // 0 = all available
};

inline int resolved_threads(const ExecPolicy& policy) {
#if defined(_OPENMP)
  return policy.n_threads > 0 ? policy.n_threads : omp_get_max_threads();
#else
  (void)policy;
  return 1;
#endif
}

inline ExecPolicy serial_policy() { return ExecPolicy{1}; }

}  // namespace slitflow
