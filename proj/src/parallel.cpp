#include "flowgest/parallel.hpp"

#include <algorithm>
#include <omp.h>

extern "C" void openblas_set_num_threads(int);

namespace flowgest {

void set_threads(int n) {
    n = std::max(1, n);
    omp_set_num_threads(n);
    // BLAS stays single-threaded; parallelism lives in our loops so that
    // per-output accumulation order never depends on the thread count.
    openblas_set_num_threads(1);
}

int threads() { return omp_get_max_threads(); }

}  // namespace flowgest
