#include "flowgest/ref/reference.hpp"

#include <algorithm>
#include <cmath>

#include "flowgest/error.hpp"

namespace flowgest::ref {

namespace {

// solve A x = b for a small symmetric system, Gaussian elimination with
// partial pivoting
void solve_dense(std::vector<double>& a, std::vector<double>& b, int n) {
    for (int col = 0; col < n; ++col) {
        int piv = col;
        for (int r = col + 1; r < n; ++r)
            if (std::abs(a[r * n + col]) > std::abs(a[piv * n + col])) piv = r;
        if (std::abs(a[piv * n + col]) < 1e-14) fail("solve_dense: singular system");
        if (piv != col) {
            for (int k = 0; k < n; ++k) std::swap(a[col * n + k], a[piv * n + k]);
            std::swap(b[col], b[piv]);
        }
        for (int r = col + 1; r < n; ++r) {
            const double f = a[r * n + col] / a[col * n + col];
            for (int k = col; k < n; ++k) a[r * n + k] -= f * a[col * n + k];
            b[r] -= f * b[col];
        }
    }
    for (int r = n - 1; r >= 0; --r) {
        double s = b[r];
        for (int k = r + 1; k < n; ++k) s -= a[r * n + k] * b[k];
        b[r] = s / a[r * n + r];
    }
}

}  // namespace

PolyFit poly_fit_at(const PlaneF& plane, int x, int y, int poly_n, double poly_sigma) {
    const int n = poly_n / 2;
    // basis order: 1, x, y, x^2, y^2, xy
    std::vector<double> gram(36, 0.0), rhs(6, 0.0);
    for (int j = -n; j <= n; ++j) {
        for (int i = -n; i <= n; ++i) {
            const double w =
                std::exp(-0.5 * (i * i + j * j) / (poly_sigma * poly_sigma));
            const double basis[6] = {1.0, static_cast<double>(i), static_cast<double>(j),
                                     static_cast<double>(i) * i, static_cast<double>(j) * j,
                                     static_cast<double>(i) * j};
            const double f = plane.at(std::clamp(x + i, 0, plane.width - 1),
                                      std::clamp(y + j, 0, plane.height - 1));
            for (int r = 0; r < 6; ++r) {
                rhs[r] += w * basis[r] * f;
                for (int c = 0; c < 6; ++c) gram[r * 6 + c] += w * basis[r] * basis[c];
            }
        }
    }
    solve_dense(gram, rhs, 6);
    PolyFit fit;
    fit.c = rhs[0];
    fit.b1 = rhs[1];
    fit.b2 = rhs[2];
    fit.a11 = rhs[3];
    fit.a22 = rhs[4];
    fit.a12 = rhs[5] / 2.0;
    return fit;
}

template <typename T>
net::Tensor4<T> conv2d_naive(const net::Tensor4<T>& x, const net::Tensor4<T>& w, int stride,
                             int pad) {
    const int out_h = (x.h + 2 * pad - w.h) / stride + 1;
    const int out_w = (x.w + 2 * pad - w.w) / stride + 1;
    net::Tensor4<T> y(x.n, w.n, out_h, out_w);
    for (int i = 0; i < x.n; ++i)
        for (int o = 0; o < w.n; ++o)
            for (int oy = 0; oy < out_h; ++oy)
                for (int ox = 0; ox < out_w; ++ox) {
                    double acc = 0.0;
                    for (int c = 0; c < x.c; ++c)
                        for (int ky = 0; ky < w.h; ++ky)
                            for (int kx = 0; kx < w.w; ++kx) {
                                const int iy = oy * stride - pad + ky;
                                const int ix = ox * stride - pad + kx;
                                if (iy < 0 || iy >= x.h || ix < 0 || ix >= x.w) continue;
                                acc += static_cast<double>(x.at(i, c, iy, ix)) *
                                       w.at(o, c, ky, kx);
                            }
                    y.at(i, o, oy, ox) = static_cast<T>(acc);
                }
    return y;
}

template net::Tensor4<float> conv2d_naive<float>(const net::Tensor4<float>&,
                                                 const net::Tensor4<float>&, int, int);
template net::Tensor4<double> conv2d_naive<double>(const net::Tensor4<double>&,
                                                   const net::Tensor4<double>&, int, int);

template <typename T>
void gemm_naive(bool trans_a, bool trans_b, int m, int n, int k, T alpha, const T* a, int lda,
                const T* b, int ldb, T beta, T* c, int ldc) {
    for (int i = 0; i < m; ++i) {
        for (int j = 0; j < n; ++j) {
            double acc = 0.0;
            for (int p = 0; p < k; ++p) {
                const T av = trans_a ? a[p * lda + i] : a[i * lda + p];
                const T bv = trans_b ? b[j * ldb + p] : b[p * ldb + j];
                acc += static_cast<double>(av) * bv;
            }
            c[i * ldc + j] = static_cast<T>(alpha * acc + beta * c[i * ldc + j]);
        }
    }
}

template void gemm_naive<float>(bool, bool, int, int, int, float, const float*, int, const float*,
                                int, float, float*, int);
template void gemm_naive<double>(bool, bool, int, int, int, double, const double*, int,
                                 const double*, int, double, double*, int);

std::vector<int> resample_time_grid(int n, int source_rate_hz, int target_rate_hz) {
    if (n <= 0) fail("resample_time_grid: empty input");
    const int out_n = static_cast<int>(
        std::lround(static_cast<double>(n) * target_rate_hz / source_rate_hz));
    std::vector<int> idx(out_n);
    for (int kk = 0; kk < out_n; ++kk) {
        // output sample k sits at time k / target; the source frame covering
        // that instant is the one whose interval [s/source, (s+1)/source)
        // contains it
        const double t = static_cast<double>(kk) / target_rate_hz;
        int s = 0;
        while ((s + 1.0) / source_rate_hz <= t + 1e-12) ++s;
        idx[kk] = std::min(s, n - 1);
    }
    return idx;
}

int vote_bruteforce(const std::vector<std::vector<float>>& chunk_probs) {
    const size_t classes = chunk_probs.at(0).size();
    std::vector<long double> mean(classes, 0.0L);
    for (const auto& p : chunk_probs)
        for (size_t k = 0; k < classes; ++k) mean[k] += static_cast<long double>(p[k]);
    for (auto& m : mean) m /= chunk_probs.size();
    size_t best = 0;
    for (size_t k = 1; k < classes; ++k)
        if (mean[k] > mean[best]) best = k;
    return static_cast<int>(best);
}

void mean_std_twopass(const std::vector<double>& xs, double& mean, double& stddev) {
    mean = 0;
    for (double x : xs) mean += x;
    mean /= xs.size();
    double sq = 0;
    for (double x : xs) sq += (x - mean) * (x - mean);
    stddev = std::sqrt(sq / xs.size());
}

double endpoint_error(const flow::FlowField& estimated, const flow::FlowField& truth,
                      int margin) {
    const int W = estimated.width(), H = estimated.height();
    double sum = 0.0;
    int count = 0;
    for (int y = margin; y < H - margin; ++y) {
        for (int x = margin; x < W - margin; ++x) {
            const double du = estimated.u.at(x, y) - truth.u.at(x, y);
            const double dv = estimated.v.at(x, y) - truth.v.at(x, y);
            sum += std::sqrt(du * du + dv * dv);
            ++count;
        }
    }
    return count ? sum / count : 0.0;
}

}  // namespace flowgest::ref
