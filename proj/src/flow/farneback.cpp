#include <algorithm>

#include "flowgest/error.hpp"
#include "flowgest/flow.hpp"

namespace flowgest::flow {

FlowField estimate_flow(const PlaneF& prev, const PlaneF& next, const FarnebackParams& params) {
    params.validate();
    if (!prev.same_size(next)) fail("estimate_flow: frame dimensions differ");

    const auto pyr_prev = gaussian_pyramid(prev, params);
    const auto pyr_next = gaussian_pyramid(next, params);
    const int levels = static_cast<int>(pyr_prev.size());

    FlowField f(pyr_prev[levels - 1].width, pyr_prev[levels - 1].height);
    for (int k = levels - 1; k >= 0; --k) {
        const PlaneF& p = pyr_prev[k];
        const PlaneF& q = pyr_next[k];
        if (f.width() != p.width || f.height() != p.height) {
            // carry flow to the finer level: resample and rescale by the
            // actual dimension ratio (rounding can make it differ from 1/scale)
            const float rx = static_cast<float>(p.width) / f.width();
            const float ry = static_cast<float>(p.height) / f.height();
            FlowField up(p.width, p.height);
            up.u = resize_bilinear(f.u, p.width, p.height);
            up.v = resize_bilinear(f.v, p.width, p.height);
            for (float& x : up.u.v) x *= rx;
            for (float& x : up.v.v) x *= ry;
            f = std::move(up);
        }
        const PolyExpansion ep = poly_expansion(p, params.poly_n, params.poly_sigma);
        const PolyExpansion eq = poly_expansion(q, params.poly_n, params.poly_sigma);
        for (int it = 0; it < params.iterations; ++it)
            f = displacement_update(ep, eq, f, params.window_size);
    }
    return f;
}

FlowField estimate_flow(const Image8& prev, const Image8& next, const FarnebackParams& params) {
    return estimate_flow(to_gray(prev), to_gray(next), params);
}

}  // namespace flowgest::flow
