#include "haarfactor/exec.hpp"

#include <cstdlib>
#include <string>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace haarfactor {

void apply_thread_cap_from_env() {
#ifdef _OPENMP
  if (const char* cap = std::getenv("HAAR_FACTOR_THREADS")) {
    try {
      int n = std::stoi(cap);
      if (n >= 1) omp_set_num_threads(n);
    } catch (...) {
      // Malformed values leave the runtime default in place.
    }
  }
#endif
}

int worker_count() {
#ifdef _OPENMP
  return omp_get_max_threads();
#else
  return 1;
#endif
}

bool use_parallel(Exec mode, std::size_t work) {
#ifdef _OPENMP
  if (mode == Exec::serial) return false;
  if (mode == Exec::parallel) return true;
  return worker_count() > 1 && work >= 256;
#else
  (void)mode;
  (void)work;
  return false;
#endif
}

}  // namespace haarfactor
