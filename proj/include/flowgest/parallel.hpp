#pragma once

namespace flowgest {

// Thread budget for all data-parallel kernels. 1 means fully serial.
// Kernels only parallelize over independent outputs and keep every
// accumulation in a fixed order, so results are identical for any setting.
void set_threads(int n);
int threads();

}  // namespace flowgest
