#include "flowgest/net/ops.hpp"

#include <algorithm>
#include <cmath>
#include <mutex>

#include <cblas.h>

namespace flowgest::net {

namespace {

std::once_flag blas_once;

void pin_blas_threads() {
    std::call_once(blas_once, [] { openblas_set_num_threads(1); });
}

}  // namespace

template <>
void gemm<float>(bool trans_a, bool trans_b, int m, int n, int k, float alpha, const float* a,
                 int lda, const float* b, int ldb, float beta, float* c, int ldc) {
    pin_blas_threads();
    cblas_sgemm(CblasRowMajor, trans_a ? CblasTrans : CblasNoTrans,
                trans_b ? CblasTrans : CblasNoTrans, m, n, k, alpha, a, lda, b, ldb, beta, c, ldc);
}

template <>
void gemm<double>(bool trans_a, bool trans_b, int m, int n, int k, double alpha, const double* a,
                  int lda, const double* b, int ldb, double beta, double* c, int ldc) {
    pin_blas_threads();
    cblas_dgemm(CblasRowMajor, trans_a ? CblasTrans : CblasNoTrans,
                trans_b ? CblasTrans : CblasNoTrans, m, n, k, alpha, a, lda, b, ldb, beta, c, ldc);
}

namespace {

inline int conv_out_dim(int in, int kernel, int stride, int pad) {
    return (in + 2 * pad - kernel) / stride + 1;
}

// sample [C,H,W] -> col [C*kh*kw, out_h*out_w], zero padding
template <typename T>
void im2col(const T* x, int c, int h, int w, int kh, int kw, int stride, int pad, T* col,
            int out_h, int out_w) {
    const int plane = h * w;
    for (int ch = 0; ch < c; ++ch) {
        for (int ky = 0; ky < kh; ++ky) {
            for (int kx = 0; kx < kw; ++kx) {
                T* dst = col + ((static_cast<size_t>(ch) * kh + ky) * kw + kx) *
                                   (static_cast<size_t>(out_h) * out_w);
                for (int oy = 0; oy < out_h; ++oy) {
                    const int iy = oy * stride - pad + ky;
                    if (iy < 0 || iy >= h) {
                        std::fill(dst, dst + out_w, T(0));
                        dst += out_w;
                        continue;
                    }
                    const T* src_row = x + ch * plane + iy * w;
                    for (int ox = 0; ox < out_w; ++ox) {
                        const int ix = ox * stride - pad + kx;
                        *dst++ = (ix >= 0 && ix < w) ? src_row[ix] : T(0);
                    }
                }
            }
        }
    }
}

template <typename T>
void col2im_add(const T* col, int c, int h, int w, int kh, int kw, int stride, int pad, T* x,
                int out_h, int out_w) {
    const int plane = h * w;
    for (int ch = 0; ch < c; ++ch) {
        for (int ky = 0; ky < kh; ++ky) {
            for (int kx = 0; kx < kw; ++kx) {
                const T* src = col + ((static_cast<size_t>(ch) * kh + ky) * kw + kx) *
                                         (static_cast<size_t>(out_h) * out_w);
                for (int oy = 0; oy < out_h; ++oy, src += out_w) {
                    const int iy = oy * stride - pad + ky;
                    if (iy < 0 || iy >= h) continue;
                    T* dst_row = x + ch * plane + iy * w;
                    for (int ox = 0; ox < out_w; ++ox) {
                        const int ix = ox * stride - pad + kx;
                        if (ix >= 0 && ix < w) dst_row[ix] += src[ox];
                    }
                }
            }
        }
    }
}

}  // namespace

template <typename T>
Tensor4<T> conv2d_forward(const Tensor4<T>& x, const Tensor4<T>& w, const ConvSpec& spec) {
    if (x.c != w.c)
        fail("conv2d: input channels " + std::to_string(x.c) + " != kernel channels " +
             std::to_string(w.c));
    const int out_h = conv_out_dim(x.h, w.h, spec.stride, spec.pad);
    const int out_w = conv_out_dim(x.w, w.w, spec.stride, spec.pad);
    if (out_h < 1 || out_w < 1) fail("conv2d: output would be empty for input " + x.shape_str());
    Tensor4<T> y(x.n, w.n, out_h, out_w);
    const int ck = w.c * w.h * w.w;
    const int hw = out_h * out_w;
#pragma omp parallel
    {
        std::vector<T> col(static_cast<size_t>(ck) * hw);
#pragma omp for schedule(static)
        for (int i = 0; i < x.n; ++i) {
            im2col(x.sample(i), x.c, x.h, x.w, w.h, w.w, spec.stride, spec.pad, col.data(), out_h,
                   out_w);
            gemm<T>(false, false, w.n, hw, ck, T(1), w.data.data(), ck, col.data(), hw, T(0),
                    y.sample(i), hw);
        }
    }
    return y;
}

template <typename T>
ConvGrads<T> conv2d_backward(const Tensor4<T>& x, const Tensor4<T>& w, const ConvSpec& spec,
                             const Tensor4<T>& dy, bool need_dx) {
    const int out_h = dy.h, out_w = dy.w;
    if (dy.n != x.n || dy.c != w.n) fail("conv2d_backward: gradient shape mismatch");
    const int ck = w.c * w.h * w.w;
    const int hw = out_h * out_w;

    ConvGrads<T> g;
    g.dw = Tensor4<T>(w.n, w.c, w.h, w.w);
    if (need_dx) g.dx = Tensor4<T>(x.n, x.c, x.h, x.w);

    // per-sample weight gradients, reduced in sample order afterwards so the
    // result is independent of the thread count
    std::vector<T> dw_per_sample(static_cast<size_t>(x.n) * w.size());
#pragma omp parallel
    {
        std::vector<T> col(static_cast<size_t>(ck) * hw);
#pragma omp for schedule(static)
        for (int i = 0; i < x.n; ++i) {
            im2col(x.sample(i), x.c, x.h, x.w, w.h, w.w, spec.stride, spec.pad, col.data(), out_h,
                   out_w);
            // dW_i = dY_i [out_c, hw] * col^T [hw, ck]
            gemm<T>(false, true, w.n, ck, hw, T(1), dy.sample(i), hw, col.data(), hw, T(0),
                    dw_per_sample.data() + static_cast<size_t>(i) * w.size(), ck);
            if (need_dx) {
                // dcol = W^T [ck, out_c] * dY_i [out_c, hw]
                gemm<T>(true, false, ck, hw, w.n, T(1), w.data.data(), ck, dy.sample(i), hw, T(0),
                        col.data(), hw);
                col2im_add(col.data(), x.c, x.h, x.w, w.h, w.w, spec.stride, spec.pad,
                           g.dx.sample(i), out_h, out_w);
            }
        }
    }
    for (int i = 0; i < x.n; ++i) {
        const T* src = dw_per_sample.data() + static_cast<size_t>(i) * w.size();
        for (size_t j = 0; j < w.size(); ++j) g.dw.data[j] += src[j];
    }
    return g;
}

template <typename T>
Tensor4<T> batchnorm_forward(const Tensor4<T>& x, BnState<T>& bn, bool training,
                             BnCache<T>* cache) {
    if (bn.channels() != x.c) fail("batchnorm: channel mismatch");
    Tensor4<T> y(x.n, x.c, x.h, x.w);
    const size_t plane = static_cast<size_t>(x.h) * x.w;
    const size_t count = static_cast<size_t>(x.n) * plane;

    std::vector<T> mean(x.c), inv_std(x.c);
#pragma omp parallel for schedule(static)
    for (int c = 0; c < x.c; ++c) {
        T m, is;
        if (training) {
            double sum = 0.0, sq = 0.0;
            for (int i = 0; i < x.n; ++i) {
                const T* p = x.sample(i) + c * plane;
                for (size_t k = 0; k < plane; ++k) {
                    sum += p[k];
                    sq += static_cast<double>(p[k]) * p[k];
                }
            }
            const double mu = sum / static_cast<double>(count);
            const double var = std::max(0.0, sq / static_cast<double>(count) - mu * mu);
            m = static_cast<T>(mu);
            is = static_cast<T>(1.0 / std::sqrt(var + static_cast<double>(bn.eps)));
            bn.running_mean[c] =
                (T(1) - bn.momentum) * bn.running_mean[c] + bn.momentum * static_cast<T>(mu);
            bn.running_var[c] =
                (T(1) - bn.momentum) * bn.running_var[c] + bn.momentum * static_cast<T>(var);
        } else {
            m = bn.running_mean[c];
            is = T(1) / std::sqrt(bn.running_var[c] + bn.eps);
        }
        mean[c] = m;
        inv_std[c] = is;
        const T a = bn.gamma[c] * is;
        const T b = bn.beta[c] - a * m;
        for (int i = 0; i < x.n; ++i) {
            const T* p = x.sample(i) + c * plane;
            T* q = y.sample(i) + c * plane;
            for (size_t k = 0; k < plane; ++k) q[k] = a * p[k] + b;
        }
    }
    if (cache) {
        cache->mean = std::move(mean);
        cache->inv_std = std::move(inv_std);
    }
    return y;
}

template <typename T>
BnGrads<T> batchnorm_backward(const Tensor4<T>& x, const BnState<T>& bn, const BnCache<T>& cache,
                              const Tensor4<T>& dy) {
    BnGrads<T> g;
    g.dx = Tensor4<T>(x.n, x.c, x.h, x.w);
    g.dgamma.assign(x.c, T(0));
    g.dbeta.assign(x.c, T(0));
    const size_t plane = static_cast<size_t>(x.h) * x.w;
    const double count = static_cast<double>(x.n) * plane;

#pragma omp parallel for schedule(static)
    for (int c = 0; c < x.c; ++c) {
        const T mu = cache.mean[c];
        const T is = cache.inv_std[c];
        double sum_dy = 0.0, sum_dy_xhat = 0.0;
        for (int i = 0; i < x.n; ++i) {
            const T* px = x.sample(i) + c * plane;
            const T* pdy = dy.sample(i) + c * plane;
            for (size_t k = 0; k < plane; ++k) {
                const double xhat = (px[k] - mu) * is;
                sum_dy += pdy[k];
                sum_dy_xhat += pdy[k] * xhat;
            }
        }
        g.dbeta[c] = static_cast<T>(sum_dy);
        g.dgamma[c] = static_cast<T>(sum_dy_xhat);
        const double gam = bn.gamma[c];
        for (int i = 0; i < x.n; ++i) {
            const T* px = x.sample(i) + c * plane;
            const T* pdy = dy.sample(i) + c * plane;
            T* pdx = g.dx.sample(i) + c * plane;
            for (size_t k = 0; k < plane; ++k) {
                const double xhat = (px[k] - mu) * is;
                pdx[k] = static_cast<T>(
                    gam * is / count * (count * pdy[k] - sum_dy - xhat * sum_dy_xhat));
            }
        }
    }
    return g;
}

template <typename T>
Tensor4<T> relu_forward(const Tensor4<T>& x) {
    Tensor4<T> y(x.n, x.c, x.h, x.w);
    const int64_t n = static_cast<int64_t>(x.size());
#pragma omp parallel for schedule(static)
    for (int64_t i = 0; i < n; ++i) y.data[i] = x.data[i] > T(0) ? x.data[i] : T(0);
    return y;
}

template <typename T>
Tensor4<T> relu_backward(const Tensor4<T>& y, const Tensor4<T>& dy) {
    if (!y.same_shape(dy)) fail("relu_backward: shape mismatch");
    Tensor4<T> dx(y.n, y.c, y.h, y.w);
    const int64_t n = static_cast<int64_t>(y.size());
#pragma omp parallel for schedule(static)
    for (int64_t i = 0; i < n; ++i) dx.data[i] = y.data[i] > T(0) ? dy.data[i] : T(0);
    return dx;
}

template <typename T>
Tensor4<T> maxpool_forward(const Tensor4<T>& x, int kernel, int stride, int pad,
                           PoolCache<T>* cache) {
    const int out_h = conv_out_dim(x.h, kernel, stride, pad);
    const int out_w = conv_out_dim(x.w, kernel, stride, pad);
    if (out_h < 1 || out_w < 1) fail("maxpool: output would be empty");
    Tensor4<T> y(x.n, x.c, out_h, out_w);
    if (cache) {
        cache->argmax.assign(y.size(), -1);
        cache->in_h = x.h;
        cache->in_w = x.w;
    }
#pragma omp parallel for collapse(2) schedule(static)
    for (int i = 0; i < x.n; ++i) {
        for (int c = 0; c < x.c; ++c) {
            const T* src = x.sample(i) + static_cast<size_t>(c) * x.h * x.w;
            for (int oy = 0; oy < out_h; ++oy) {
                for (int ox = 0; ox < out_w; ++ox) {
                    T best = -std::numeric_limits<T>::infinity();
                    int best_idx = -1;
                    for (int ky = 0; ky < kernel; ++ky) {
                        const int iy = oy * stride - pad + ky;
                        if (iy < 0 || iy >= x.h) continue;
                        for (int kx = 0; kx < kernel; ++kx) {
                            const int ix = ox * stride - pad + kx;
                            if (ix < 0 || ix >= x.w) continue;
                            const T v = src[iy * x.w + ix];
                            if (v > best) {
                                best = v;
                                best_idx = iy * x.w + ix;
                            }
                        }
                    }
                    y.at(i, c, oy, ox) = best;
                    if (cache)
                        cache->argmax[((static_cast<size_t>(i) * x.c + c) * out_h + oy) * out_w +
                                      ox] = best_idx;
                }
            }
        }
    }
    return y;
}

template <typename T>
Tensor4<T> maxpool_backward(const Tensor4<T>& dy, const PoolCache<T>& cache, int in_c) {
    Tensor4<T> dx(dy.n, in_c, cache.in_h, cache.in_w);
    const size_t out_plane = static_cast<size_t>(dy.h) * dy.w;
#pragma omp parallel for collapse(2) schedule(static)
    for (int i = 0; i < dy.n; ++i) {
        for (int c = 0; c < in_c; ++c) {
            const T* pdy = dy.sample(i) + c * out_plane;
            T* pdx = dx.sample(i) + static_cast<size_t>(c) * cache.in_h * cache.in_w;
            const int32_t* am =
                cache.argmax.data() + (static_cast<size_t>(i) * in_c + c) * out_plane;
            for (size_t k = 0; k < out_plane; ++k)
                if (am[k] >= 0) pdx[am[k]] += pdy[k];
        }
    }
    return dx;
}

template <typename T>
Tensor4<T> global_avg_pool_forward(const Tensor4<T>& x) {
    Tensor4<T> y(x.n, x.c, 1, 1);
    const size_t plane = static_cast<size_t>(x.h) * x.w;
#pragma omp parallel for collapse(2) schedule(static)
    for (int i = 0; i < x.n; ++i) {
        for (int c = 0; c < x.c; ++c) {
            const T* p = x.sample(i) + c * plane;
            double acc = 0.0;
            for (size_t k = 0; k < plane; ++k) acc += p[k];
            y.at(i, c, 0, 0) = static_cast<T>(acc / static_cast<double>(plane));
        }
    }
    return y;
}

template <typename T>
Tensor4<T> global_avg_pool_backward(const Tensor4<T>& dy, int h, int w) {
    Tensor4<T> dx(dy.n, dy.c, h, w);
    const T inv = T(1) / (static_cast<T>(h) * w);
    const size_t plane = static_cast<size_t>(h) * w;
#pragma omp parallel for collapse(2) schedule(static)
    for (int i = 0; i < dy.n; ++i) {
        for (int c = 0; c < dy.c; ++c) {
            const T g = dy.at(i, c, 0, 0) * inv;
            T* p = dx.sample(i) + c * plane;
            for (size_t k = 0; k < plane; ++k) p[k] = g;
        }
    }
    return dx;
}

template <typename T>
Tensor4<T> dropout_forward(const Tensor4<T>& x, T p, bool training, Rng& rng,
                           DropoutCache<T>* cache) {
    if (p < T(0) || p >= T(1)) fail("dropout: p must be in [0, 1)");
    if (!training || p == T(0)) {
        if (cache) {
            cache->keep.clear();
            cache->scale = T(1);
        }
        return x;
    }
    Tensor4<T> y(x.n, x.c, x.h, x.w);
    std::vector<uint8_t> keep(x.size());
    for (size_t i = 0; i < keep.size(); ++i)
        keep[i] = rng.uniform() >= static_cast<double>(p) ? 1 : 0;
    const T scale = T(1) / (T(1) - p);
    for (size_t i = 0; i < x.size(); ++i) y.data[i] = keep[i] ? x.data[i] * scale : T(0);
    if (cache) {
        cache->keep = std::move(keep);
        cache->scale = scale;
    }
    return y;
}

template <typename T>
Tensor4<T> dropout_backward(const Tensor4<T>& dy, const DropoutCache<T>& cache) {
    if (cache.keep.empty()) return dy;
    Tensor4<T> dx(dy.n, dy.c, dy.h, dy.w);
    for (size_t i = 0; i < dy.size(); ++i)
        dx.data[i] = cache.keep[i] ? dy.data[i] * cache.scale : T(0);
    return dx;
}

template <typename T>
Tensor4<T> linear_forward(const Tensor4<T>& x, const Tensor4<T>& w, const Tensor4<T>& b) {
    if (x.h != 1 || x.w != 1 || x.c != w.c) fail("linear: shape mismatch, x " + x.shape_str());
    Tensor4<T> y(x.n, w.n, 1, 1);
    // y [N,K] = x [N,C] * w^T [C,K]
    gemm<T>(false, true, x.n, w.n, x.c, T(1), x.data.data(), x.c, w.data.data(), w.c, T(0),
            y.data.data(), w.n);
    for (int i = 0; i < x.n; ++i)
        for (int k = 0; k < w.n; ++k) y.at(i, k, 0, 0) += b.data[k];
    return y;
}

template <typename T>
LinearGrads<T> linear_backward(const Tensor4<T>& x, const Tensor4<T>& w, const Tensor4<T>& dy) {
    LinearGrads<T> g;
    g.dx = Tensor4<T>(x.n, x.c, 1, 1);
    g.dw = Tensor4<T>(w.n, w.c, 1, 1);
    g.db = Tensor4<T>(1, w.n, 1, 1);
    // dx [N,C] = dy [N,K] * w [K,C]
    gemm<T>(false, false, x.n, x.c, w.n, T(1), dy.data.data(), w.n, w.data.data(), w.c, T(0),
            g.dx.data.data(), x.c);
    // dw [K,C] = dy^T [K,N] * x [N,C]
    gemm<T>(true, false, w.n, w.c, x.n, T(1), dy.data.data(), w.n, x.data.data(), x.c, T(0),
            g.dw.data.data(), w.c);
    for (int i = 0; i < x.n; ++i)
        for (int k = 0; k < w.n; ++k) g.db.data[k] += dy.at(i, k, 0, 0);
    return g;
}

template <typename T>
Tensor4<T> softmax(const Tensor4<T>& logits) {
    if (logits.h != 1 || logits.w != 1) fail("softmax: expected [N,K,1,1] logits");
    Tensor4<T> p(logits.n, logits.c, 1, 1);
    for (int i = 0; i < logits.n; ++i) {
        const T* in = logits.sample(i);
        T* out = p.sample(i);
        T mx = in[0];
        for (int k = 1; k < logits.c; ++k) mx = std::max(mx, in[k]);
        double sum = 0.0;
        for (int k = 0; k < logits.c; ++k) {
            const double e = std::exp(static_cast<double>(in[k] - mx));
            out[k] = static_cast<T>(e);
            sum += e;
        }
        const T inv = static_cast<T>(1.0 / sum);
        for (int k = 0; k < logits.c; ++k) out[k] *= inv;
    }
    return p;
}

template <typename T>
LossResult<T> softmax_cross_entropy(const Tensor4<T>& logits, const std::vector<int>& targets) {
    if (static_cast<int>(targets.size()) != logits.n)
        fail("softmax_cross_entropy: batch size mismatch");
    LossResult<T> r;
    r.dlogits = Tensor4<T>(logits.n, logits.c, 1, 1);
    r.predictions.resize(logits.n);
    Tensor4<T> p = softmax(logits);
    double loss = 0.0;
    const T invn = T(1) / static_cast<T>(logits.n);
    for (int i = 0; i < logits.n; ++i) {
        const int t = targets[i];
        if (t < 0 || t >= logits.c) fail("softmax_cross_entropy: target out of range");
        const T* pi = p.sample(i);
        T* d = r.dlogits.sample(i);
        int arg = 0;
        for (int k = 0; k < logits.c; ++k) {
            d[k] = pi[k] * invn;
            if (pi[k] > pi[arg]) arg = k;
        }
        d[t] -= invn;
        r.predictions[i] = arg;
        loss -= std::log(std::max(static_cast<double>(pi[t]), 1e-300));
    }
    r.loss = static_cast<T>(loss / logits.n);
    return r;
}

// explicit instantiations: float for training, double for the
// finite-difference gradient suite
#define FLOWGEST_INSTANTIATE_OPS(T)                                                            \
    template Tensor4<T> conv2d_forward<T>(const Tensor4<T>&, const Tensor4<T>&,               \
                                          const ConvSpec&);                                   \
    template ConvGrads<T> conv2d_backward<T>(const Tensor4<T>&, const Tensor4<T>&,            \
                                             const ConvSpec&, const Tensor4<T>&, bool);       \
    template Tensor4<T> batchnorm_forward<T>(const Tensor4<T>&, BnState<T>&, bool,            \
                                             BnCache<T>*);                                    \
    template BnGrads<T> batchnorm_backward<T>(const Tensor4<T>&, const BnState<T>&,           \
                                              const BnCache<T>&, const Tensor4<T>&);          \
    template Tensor4<T> relu_forward<T>(const Tensor4<T>&);                                   \
    template Tensor4<T> relu_backward<T>(const Tensor4<T>&, const Tensor4<T>&);               \
    template Tensor4<T> maxpool_forward<T>(const Tensor4<T>&, int, int, int, PoolCache<T>*);  \
    template Tensor4<T> maxpool_backward<T>(const Tensor4<T>&, const PoolCache<T>&, int);     \
    template Tensor4<T> global_avg_pool_forward<T>(const Tensor4<T>&);                        \
    template Tensor4<T> global_avg_pool_backward<T>(const Tensor4<T>&, int, int);             \
    template Tensor4<T> dropout_forward<T>(const Tensor4<T>&, T, bool, Rng&,                  \
                                           DropoutCache<T>*);                                 \
    template Tensor4<T> dropout_backward<T>(const Tensor4<T>&, const DropoutCache<T>&);       \
    template Tensor4<T> linear_forward<T>(const Tensor4<T>&, const Tensor4<T>&,               \
                                          const Tensor4<T>&);                                 \
    template LinearGrads<T> linear_backward<T>(const Tensor4<T>&, const Tensor4<T>&,          \
                                               const Tensor4<T>&);                            \
    template Tensor4<T> softmax<T>(const Tensor4<T>&);                                        \
    template LossResult<T> softmax_cross_entropy<T>(const Tensor4<T>&, const std::vector<int>&);

FLOWGEST_INSTANTIATE_OPS(float)
FLOWGEST_INSTANTIATE_OPS(double)

}  // namespace flowgest::net
