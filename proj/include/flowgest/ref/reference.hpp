#pragma once

#include <vector>

#include "flowgest/flow.hpp"
#include "flowgest/net/tensor.hpp"

namespace flowgest::ref {

// Serial reference implementations kept for testing. They trade speed for
// obviousness: direct definitions, no separability tricks, no BLAS, no
// threading. Tests compare the optimized kernels against these; the
// benchmark target measures the gap.

// Quadratic fit at a single pixel by explicitly solving the Gaussian-
// weighted normal equations over the poly_n x poly_n neighborhood
// (clamped edges). Output order: a11, a12, a22, b1, b2, c.
struct PolyFit {
    double a11, a12, a22, b1, b2, c;
};
PolyFit poly_fit_at(const PlaneF& plane, int x, int y, int poly_n, double poly_sigma);

// Direct convolution, zero padding, no bias: the definition, seven loops.
template <typename T>
net::Tensor4<T> conv2d_naive(const net::Tensor4<T>& x, const net::Tensor4<T>& w, int stride,
                             int pad);

// Plain triple-loop matrix product, row-major.
template <typename T>
void gemm_naive(bool trans_a, bool trans_b, int m, int n, int k, T alpha, const T* a, int lda,
                const T* b, int ldb, T beta, T* c, int ldc);

// Temporal resampling by intersecting the output time grid with the source
// frame intervals (the definition the index formula is derived from).
std::vector<int> resample_time_grid(int n, int source_rate_hz, int target_rate_hz);

// Mean-then-argmax in long double, ties to the lowest index.
int vote_bruteforce(const std::vector<std::vector<float>>& chunk_probs);

// Two-pass mean / population standard deviation.
void mean_std_twopass(const std::vector<double>& xs, double& mean, double& stddev);

// Mean endpoint error between two flow fields over the interior (margin
// pixels skipped on every side).
double endpoint_error(const flow::FlowField& estimated, const flow::FlowField& truth, int margin);

}  // namespace flowgest::ref
