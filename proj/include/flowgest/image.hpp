#pragma once

#include <cstdint>
#include <vector>

namespace flowgest {

// Single-channel float plane, row-major; pixel (x, y) at y * width + x.
// Working currency of the flow and encode stages.
struct PlaneF {
    int width = 0;
    int height = 0;
    std::vector<float> v;

    PlaneF() = default;
    PlaneF(int w, int h, float fill = 0.f)
        : width(w), height(h), v(static_cast<size_t>(w) * h, fill) {}

    float& at(int x, int y) { return v[static_cast<size_t>(y) * width + x]; }
    float at(int x, int y) const { return v[static_cast<size_t>(y) * width + x]; }
    float* row(int y) { return v.data() + static_cast<size_t>(y) * width; }
    const float* row(int y) const { return v.data() + static_cast<size_t>(y) * width; }
    size_t size() const { return v.size(); }
    bool same_size(const PlaneF& o) const { return width == o.width && height == o.height; }
};

// 8-bit image, 1 (gray) or 3 (RGB, interleaved) channels.
struct Image8 {
    int width = 0;
    int height = 0;
    int channels = 1;
    std::vector<uint8_t> px;

    Image8() = default;
    Image8(int w, int h, int c = 1, uint8_t fill = 0)
        : width(w), height(h), channels(c),
          px(static_cast<size_t>(w) * h * c, fill) {}

    uint8_t& at(int x, int y, int c = 0) {
        return px[(static_cast<size_t>(y) * width + x) * channels + c];
    }
    uint8_t at(int x, int y, int c = 0) const {
        return px[(static_cast<size_t>(y) * width + x) * channels + c];
    }
};

// Rec.601 luminance, 0.299 R + 0.587 G + 0.114 B; values stay in [0, 255].
PlaneF to_gray(const Image8& img);

// Round-and-clamp a float plane into an 8-bit grayscale image.
Image8 to_image8(const PlaneF& p);

// Clamped bilinear sample at (x, y) in pixel coordinates.
float bilinear_at(const PlaneF& p, float x, float y);

// Top-left-aligned bilinear resize: output (x, y) samples the source at
// (x * sw / dw, y * sh / dh). Identity scale is bitwise identity.
PlaneF resize_bilinear(const PlaneF& src, int dst_w, int dst_h);
Image8 resize_bilinear(const Image8& src, int dst_w, int dst_h);

// Separable Gaussian blur with clamped edges, kernel radius ceil(3 sigma).
PlaneF gaussian_blur(const PlaneF& src, float sigma);

}  // namespace flowgest
