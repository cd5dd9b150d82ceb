#include <array>
#include <cmath>
#include <vector>

#include "flowgest/error.hpp"
#include "flowgest/flow.hpp"

namespace flowgest::flow {

namespace {

// Gaussian applicability taps over [-n, n] plus the inverse Gram matrix of
// the basis {1, x, y, x^2, y^2, xy}. With a separable applicability the Gram
// matrix couples only {1, x^2, y^2}; everything else is diagonal.
struct PolyKernel {
    int n;
    std::vector<double> g, xg, xxg;  // g[i+n], i*g, i^2*g
    // inverse entries, by basis block
    double inv_b;          // (x,x) and (y,y): 1 / s2
    double inv_xy;         // (xy,xy): 1 / s2^2
    double k00, k01, k11, k12;  // 3x3 block {1, x^2, y^2}: [[k00,k01,k01],[k01,k11,k12],[k01,k12,k11]]
};

PolyKernel make_kernel(int poly_n, double sigma) {
    PolyKernel k;
    k.n = poly_n / 2;
    const int taps = 2 * k.n + 1;
    k.g.resize(taps);
    k.xg.resize(taps);
    k.xxg.resize(taps);
    double sum = 0.0;
    for (int i = -k.n; i <= k.n; ++i) {
        k.g[i + k.n] = std::exp(-0.5 * i * i / (sigma * sigma));
        sum += k.g[i + k.n];
    }
    double s2 = 0.0, s4 = 0.0;
    for (int i = -k.n; i <= k.n; ++i) {
        k.g[i + k.n] /= sum;
        k.xg[i + k.n] = i * k.g[i + k.n];
        k.xxg[i + k.n] = static_cast<double>(i) * i * k.g[i + k.n];
        s2 += k.xxg[i + k.n];
        s4 += static_cast<double>(i) * i * k.xxg[i + k.n];
    }
    k.inv_b = 1.0 / s2;
    k.inv_xy = 1.0 / (s2 * s2);

    // invert [[1, s2, s2], [s2, s4, s2^2], [s2, s2^2, s4]] in closed form
    // using its symmetry under swapping the two quadratic basis functions.
    const double a = s4, b = s2 * s2, c = s2;
    const double det = (a - b) * (a + b - 2.0 * c * c);
    if (std::abs(det) < 1e-12) fail("poly_expansion: degenerate applicability");
    k.k00 = (a + b) / (a + b - 2.0 * c * c);
    k.k01 = -c / (a + b - 2.0 * c * c);
    k.k11 = (a - c * c) / det;
    k.k12 = (c * c - b) / det;
    return k;
}

}  // namespace

PolyExpansion poly_expansion(const PlaneF& plane, int poly_n, float poly_sigma) {
    if (poly_n < 3 || poly_n % 2 == 0) fail("poly_expansion: poly_n must be odd and >= 3");
    if (plane.width <= poly_n || plane.height <= poly_n)
        fail("poly_expansion: plane smaller than poly_n");
    const PolyKernel k = make_kernel(poly_n, poly_sigma);
    const int n = k.n;
    const int W = plane.width, H = plane.height;

    PolyExpansion e;
    e.a11 = PlaneF(W, H);
    e.a12 = PlaneF(W, H);
    e.a22 = PlaneF(W, H);
    e.b1 = PlaneF(W, H);
    e.b2 = PlaneF(W, H);
    e.c = PlaneF(W, H);

    // vertical pass: correlate columns with {g, x g, x^2 g}
    PlaneF t0(W, H), t1(W, H), t2(W, H);
#pragma omp parallel for schedule(static)
    for (int y = 0; y < H; ++y) {
        float* r0 = t0.row(y);
        float* r1 = t1.row(y);
        float* r2 = t2.row(y);
        for (int x = 0; x < W; ++x) {
            double s0 = 0.0, s1 = 0.0, s2 = 0.0;
            for (int j = -n; j <= n; ++j) {
                const int yy = std::clamp(y + j, 0, H - 1);
                const double f = plane.at(x, yy);
                s0 += k.g[j + n] * f;
                s1 += k.xg[j + n] * f;
                s2 += k.xxg[j + n] * f;
            }
            r0[x] = static_cast<float>(s0);
            r1[x] = static_cast<float>(s1);
            r2[x] = static_cast<float>(s2);
        }
    }

    // horizontal pass: assemble the six moments, then apply the inverse Gram.
#pragma omp parallel for schedule(static)
    for (int y = 0; y < H; ++y) {
        const float* r0 = t0.row(y);
        const float* r1 = t1.row(y);
        const float* r2 = t2.row(y);
        for (int x = 0; x < W; ++x) {
            double m1 = 0.0, mx = 0.0, my = 0.0, mxx = 0.0, myy = 0.0, mxy = 0.0;
            for (int i = -n; i <= n; ++i) {
                const int xx = std::clamp(x + i, 0, W - 1);
                const double g = k.g[i + n], xg = k.xg[i + n], xxg = k.xxg[i + n];
                m1 += g * r0[xx];
                mx += xg * r0[xx];
                my += g * r1[xx];
                mxx += xxg * r0[xx];
                myy += g * r2[xx];
                mxy += xg * r1[xx];
            }
            e.b1.at(x, y) = static_cast<float>(k.inv_b * mx);
            e.b2.at(x, y) = static_cast<float>(k.inv_b * my);
            e.a12.at(x, y) = static_cast<float>(0.5 * k.inv_xy * mxy);
            e.c.at(x, y) = static_cast<float>(k.k00 * m1 + k.k01 * (mxx + myy));
            e.a11.at(x, y) = static_cast<float>(k.k01 * m1 + k.k11 * mxx + k.k12 * myy);
            e.a22.at(x, y) = static_cast<float>(k.k01 * m1 + k.k12 * mxx + k.k11 * myy);
        }
    }
    return e;
}

}  // namespace flowgest::flow
