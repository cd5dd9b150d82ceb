#pragma once

#include <vector>

#include "flowgest/net/tensor.hpp"
#include "flowgest/rng.hpp"

namespace flowgest::net {

// Thin wrapper over BLAS {s,d}gemm, row-major. C = alpha op(A) op(B) + beta C.
// Always runs single-threaded inside one call; callers parallelize over
// independent work so results do not depend on the thread count.
template <typename T>
void gemm(bool trans_a, bool trans_b, int m, int n, int k, T alpha, const T* a, int lda,
          const T* b, int ldb, T beta, T* c, int ldc);

struct ConvSpec {
    int stride = 1;
    int pad = 0;
};

// weight shape [out_c, in_c, kh, kw]; zero padding; no bias (BN follows
// every convolution in this network, the linear layer carries the bias).
template <typename T>
Tensor4<T> conv2d_forward(const Tensor4<T>& x, const Tensor4<T>& w, const ConvSpec& spec);

template <typename T>
struct ConvGrads {
    Tensor4<T> dx, dw;
};

// need_dx = false skips the input gradient (first layer).
template <typename T>
ConvGrads<T> conv2d_backward(const Tensor4<T>& x, const Tensor4<T>& w, const ConvSpec& spec,
                             const Tensor4<T>& dy, bool need_dx = true);

template <typename T>
struct BnState {
    std::vector<T> gamma, beta;          // learned, per channel
    std::vector<T> running_mean, running_var;
    T eps = static_cast<T>(1e-5);
    T momentum = static_cast<T>(0.1);

    explicit BnState(int channels = 0)
        : gamma(channels, T(1)), beta(channels, T(0)),
          running_mean(channels, T(0)), running_var(channels, T(1)) {}
    int channels() const { return static_cast<int>(gamma.size()); }
};

template <typename T>
struct BnCache {
    std::vector<T> mean, inv_std;  // batch statistics of the forward pass
};

// Training mode normalizes with biased batch statistics and updates the
// running estimates; eval mode is the affine map from the frozen stats.
template <typename T>
Tensor4<T> batchnorm_forward(const Tensor4<T>& x, BnState<T>& bn, bool training,
                             BnCache<T>* cache);

template <typename T>
struct BnGrads {
    Tensor4<T> dx;
    std::vector<T> dgamma, dbeta;
};

template <typename T>
BnGrads<T> batchnorm_backward(const Tensor4<T>& x, const BnState<T>& bn, const BnCache<T>& cache,
                              const Tensor4<T>& dy);

template <typename T>
Tensor4<T> relu_forward(const Tensor4<T>& x);
// dx from dy and the forward *output* (y > 0 iff x > 0)
template <typename T>
Tensor4<T> relu_backward(const Tensor4<T>& y, const Tensor4<T>& dy);

template <typename T>
struct PoolCache {
    std::vector<int32_t> argmax;  // flat input index per output element
    int in_h = 0, in_w = 0;
};

template <typename T>
Tensor4<T> maxpool_forward(const Tensor4<T>& x, int kernel, int stride, int pad,
                           PoolCache<T>* cache);
template <typename T>
Tensor4<T> maxpool_backward(const Tensor4<T>& dy, const PoolCache<T>& cache, int in_c);

// [N,C,H,W] -> [N,C,1,1]
template <typename T>
Tensor4<T> global_avg_pool_forward(const Tensor4<T>& x);
template <typename T>
Tensor4<T> global_avg_pool_backward(const Tensor4<T>& dy, int h, int w);

template <typename T>
struct DropoutCache {
    std::vector<uint8_t> keep;
    T scale = T(1);
};

// Inverted dropout; identity when p == 0 or in eval mode. The mask is drawn
// serially from the given RNG so runs are reproducible.
template <typename T>
Tensor4<T> dropout_forward(const Tensor4<T>& x, T p, bool training, Rng& rng,
                           DropoutCache<T>* cache);
template <typename T>
Tensor4<T> dropout_backward(const Tensor4<T>& dy, const DropoutCache<T>& cache);

// x [N,C,1,1] * w [K,C,1,1] + b [1,K,1,1] -> [N,K,1,1]
template <typename T>
Tensor4<T> linear_forward(const Tensor4<T>& x, const Tensor4<T>& w, const Tensor4<T>& b);

template <typename T>
struct LinearGrads {
    Tensor4<T> dx, dw, db;
};
template <typename T>
LinearGrads<T> linear_backward(const Tensor4<T>& x, const Tensor4<T>& w, const Tensor4<T>& dy);

// rows of [N,K,1,1] logits -> probabilities, each row sums to 1
template <typename T>
Tensor4<T> softmax(const Tensor4<T>& logits);

template <typename T>
struct LossResult {
    T loss = T(0);           // mean over the batch
    Tensor4<T> dlogits;      // gradient wrt logits
    std::vector<int> predictions;
};

template <typename T>
LossResult<T> softmax_cross_entropy(const Tensor4<T>& logits, const std::vector<int>& targets);

}  // namespace flowgest::net
