#pragma once

#include <cstddef>

namespace haarfactor {

// Execution policy for the data-parallel kernels. Every parallel kernel has a
// serial reference twin producing bit-identical results; `automatic` picks the
// parallel path when OpenMP is active and the workload is large enough.
enum class Exec { serial, parallel, automatic };

// Applies the HAAR_FACTOR_THREADS cap (if the variable is set) to the OpenMP
// runtime. Safe to call when built without OpenMP.
void apply_thread_cap_from_env();

int worker_count();

// True when the kernel should take the parallel path for `work` items.
bool use_parallel(Exec mode, std::size_t work);

}  // namespace haarfactor
