#include <algorithm>
#include <cmath>

#include "flowgest/error.hpp"
#include "flowgest/flow.hpp"

namespace flowgest::flow {

namespace {

// Separable box average with clamped edges, accumulated in double.
PlaneF box_average(const PlaneF& src, int window) {
    const int r = window / 2;
    const int W = src.width, H = src.height;
    const double inv = 1.0 / window;
    PlaneF tmp(W, H), out(W, H);
#pragma omp parallel for schedule(static)
    for (int y = 0; y < H; ++y) {
        const float* in = src.row(y);
        float* o = tmp.row(y);
        // running horizontal sum; edge clamp folds into the initial window
        double acc = 0.0;
        for (int i = -r; i <= r; ++i) acc += in[std::clamp(i, 0, W - 1)];
        o[0] = static_cast<float>(acc * inv);
        for (int x = 1; x < W; ++x) {
            acc += in[std::min(x + r, W - 1)] - in[std::clamp(x - r - 1, 0, W - 1)];
            o[x] = static_cast<float>(acc * inv);
        }
    }
#pragma omp parallel for schedule(static)
    for (int x = 0; x < W; ++x) {
        double acc = 0.0;
        for (int i = -r; i <= r; ++i) acc += tmp.at(x, std::clamp(i, 0, H - 1));
        out.at(x, 0) = static_cast<float>(acc * inv);
        for (int y = 1; y < H; ++y) {
            acc += tmp.at(x, std::min(y + r, H - 1)) - tmp.at(x, std::clamp(y - r - 1, 0, H - 1));
            out.at(x, y) = static_cast<float>(acc * inv);
        }
    }
    return out;
}

}  // namespace

FlowField displacement_update(const PolyExpansion& prev, const PolyExpansion& next,
                              const FlowField& flow_in, int window_size) {
    const int W = prev.width(), H = prev.height();
    if (next.width() != W || next.height() != H)
        fail("displacement_update: expansion dimensions differ");
    if (flow_in.width() != W || flow_in.height() != H)
        fail("displacement_update: flow dimensions differ");
    if (window_size < 1 || window_size % 2 == 0)
        fail("displacement_update: window_size must be odd");

    // Per-pixel normal equations G d = h of the windowed least-squares
    // problem, with A and delta-b averaged between the two frames.
    PlaneF g11(W, H), g12(W, H), g22(W, H), h1(W, H), h2(W, H);
#pragma omp parallel for schedule(static)
    for (int y = 0; y < H; ++y) {
        for (int x = 0; x < W; ++x) {
            const float du = flow_in.u.at(x, y);
            const float dv = flow_in.v.at(x, y);
            const float wx = std::clamp(x + du, 0.f, static_cast<float>(W - 1));
            const float wy = std::clamp(y + dv, 0.f, static_cast<float>(H - 1));

            const float a11 = 0.5f * (prev.a11.at(x, y) + bilinear_at(next.a11, wx, wy));
            const float a12 = 0.5f * (prev.a12.at(x, y) + bilinear_at(next.a12, wx, wy));
            const float a22 = 0.5f * (prev.a22.at(x, y) + bilinear_at(next.a22, wx, wy));
            const float db1 =
                -0.5f * (bilinear_at(next.b1, wx, wy) - prev.b1.at(x, y)) + a11 * du + a12 * dv;
            const float db2 =
                -0.5f * (bilinear_at(next.b2, wx, wy) - prev.b2.at(x, y)) + a12 * du + a22 * dv;

            g11.at(x, y) = a11 * a11 + a12 * a12;
            g12.at(x, y) = a12 * (a11 + a22);
            g22.at(x, y) = a12 * a12 + a22 * a22;
            h1.at(x, y) = a11 * db1 + a12 * db2;
            h2.at(x, y) = a12 * db1 + a22 * db2;
        }
    }

    g11 = box_average(g11, window_size);
    g12 = box_average(g12, window_size);
    g22 = box_average(g22, window_size);
    h1 = box_average(h1, window_size);
    h2 = box_average(h2, window_size);

    FlowField out(W, H);
#pragma omp parallel for schedule(static)
    for (int y = 0; y < H; ++y) {
        for (int x = 0; x < W; ++x) {
            const double a = g11.at(x, y), b = g12.at(x, y), c = g22.at(x, y);
            const double eps = 1e-6 * (a + c);  // regularize near-singular systems
            const double ra = a + eps, rc = c + eps;
            const double det = ra * rc - b * b;
            const double p = h1.at(x, y), q = h2.at(x, y);
            if (det > 1e-30 && std::isfinite(det)) {
                out.u.at(x, y) = static_cast<float>((rc * p - b * q) / det);
                out.v.at(x, y) = static_cast<float>((ra * q - b * p) / det);
            } else {
                out.u.at(x, y) = 0.f;
                out.v.at(x, y) = 0.f;
            }
        }
    }
    return out;
}

}  // namespace flowgest::flow
