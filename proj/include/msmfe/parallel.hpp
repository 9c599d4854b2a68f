#pragma once

#include <cstdlib>
#include <string>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace msmfe {

/// Which implementation of a kernel to run. The serial variants are the
/// reference implementations; the OpenMP variants must reproduce them.
enum class ExecPolicy { serial, openmp };

/// Worker count for OpenMP kernels. MSMFE_THREADS caps it; default is all cores.
inline int worker_count() {
#ifdef _OPENMP
  int n = omp_get_max_threads();
#else
  int n = 1;
#endif
  if (const char* env = std::getenv("MSMFE_THREADS")) {
    int cap = std::atoi(env);
    if (cap > 0 && cap < n) n = cap;
  }
  return n;
}

}  // namespace msmfe
