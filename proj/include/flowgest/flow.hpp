#pragma once

#include <string>
#include <vector>

#include "flowgest/image.hpp"

namespace flowgest::flow {

struct FarnebackParams {
    float pyramid_scale = 0.5f;  // in (0, 1)
    int levels = 3;
    int window_size = 15;  // odd
    int iterations = 3;
    int poly_n = 5;  // odd expansion neighborhood
    float poly_sigma = 1.2f;

    void validate() const;  // throws Error on bad combinations
};

// Per-pixel displacement field; u is horizontal (+x right), v vertical
// (+y down), in pixels of the prev frame.
struct FlowField {
    PlaneF u, v;

    FlowField() = default;
    FlowField(int w, int h) : u(w, h, 0.f), v(w, h, 0.f) {}
    int width() const { return u.width; }
    int height() const { return u.height; }
};

// Quadratic model f(x) ~= x^T A x + b^T x + c fitted around each pixel,
// A = [[a11, a12], [a12, a22]]. The c plane is not used by the flow solve
// but kept for completeness.
struct PolyExpansion {
    PlaneF a11, a12, a22, b1, b2, c;

    int width() const { return a11.width; }
    int height() const { return a11.height; }
};

// Level 0 is the input; level k has dimensions round(scale^k * original),
// produced by Gaussian blur then bilinear resampling. Truncates (with a
// stderr warning) once a side would drop below 4 px; never empty.
std::vector<PlaneF> gaussian_pyramid(const PlaneF& image, const FarnebackParams& params);

// Gaussian-weighted least-squares fit of the quadratic model over a
// poly_n x poly_n neighborhood, clamped edges, via separable correlations
// (64-bit accumulation).
PolyExpansion poly_expansion(const PlaneF& plane, int poly_n, float poly_sigma);

// One Farneback iteration: warp the `next` expansion by flow_in, average
// coefficients, box-average the normal equations over window_size and solve
// the regularized 2x2 system per pixel.
FlowField displacement_update(const PolyExpansion& prev, const PolyExpansion& next,
                              const FlowField& flow_in, int window_size);

// Coarse-to-fine estimation over the Gaussian pyramid.
FlowField estimate_flow(const PlaneF& prev, const PlaneF& next, const FarnebackParams& params);
FlowField estimate_flow(const Image8& prev, const Image8& next, const FarnebackParams& params);

// Raw dump: 16-byte header (magic "FLOW", u32 width, u32 height, u32
// reserved), then the u plane and the v plane as little-endian f32.
void write_flow_raw(const FlowField& f, const std::string& path);
FlowField read_flow_raw(const std::string& path);

}  // namespace flowgest::flow
