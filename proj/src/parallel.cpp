#include "vzcert/parallel.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace vzcert {

namespace {
int g_threads = 0;
}

void set_scan_threads(int threads) {
  g_threads = threads;
#ifdef _OPENMP
  if (threads > 0) omp_set_num_threads(threads);
#endif
}

int scan_threads() {
#ifdef _OPENMP
  if (g_threads > 0) return g_threads;
  return omp_get_max_threads();
#else
  return 1;
#endif
}

}  // namespace vzcert
