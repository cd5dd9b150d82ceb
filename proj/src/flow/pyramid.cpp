#include <cmath>
#include <cstdio>

#include "flowgest/error.hpp"
#include "flowgest/flow.hpp"

namespace flowgest::flow {

void FarnebackParams::validate() const {
    if (!(pyramid_scale > 0.f && pyramid_scale < 1.f))
        fail("pyramid_scale must be in (0, 1)");
    if (levels < 1) fail("levels must be >= 1");
    if (window_size < 1 || window_size % 2 == 0) fail("window_size must be odd and positive");
    if (iterations < 1) fail("iterations must be >= 1");
    if (poly_n < 3 || poly_n % 2 == 0) fail("poly_n must be odd and >= 3");
    if (!(poly_sigma > 0.f)) fail("poly_sigma must be positive");
}

std::vector<PlaneF> gaussian_pyramid(const PlaneF& image, const FarnebackParams& params) {
    params.validate();
    if (image.width < 2 || image.height < 2) fail("gaussian_pyramid: image must be at least 2x2");

    std::vector<PlaneF> pyr;
    pyr.reserve(params.levels);
    pyr.push_back(image);

    // Anti-alias blur proportional to the downsampling factor.
    const float sigma = 0.5f / params.pyramid_scale;
    for (int k = 1; k < params.levels; ++k) {
        double s = std::pow(static_cast<double>(params.pyramid_scale), k);
        int w = static_cast<int>(std::lround(image.width * s));
        int h = static_cast<int>(std::lround(image.height * s));
        if (w < 4 || h < 4) {
            std::fprintf(stderr,
                         "flowgest: pyramid truncated at %d levels (next level %dx%d too small)\n",
                         k, w, h);
            break;
        }
        pyr.push_back(resize_bilinear(gaussian_blur(pyr.back(), sigma), w, h));
    }
    return pyr;
}

}  // namespace flowgest::flow
