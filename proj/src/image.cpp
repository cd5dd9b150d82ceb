#include "flowgest/image.hpp"

#include <algorithm>
#include <cmath>

#include "flowgest/error.hpp"

namespace flowgest {

PlaneF to_gray(const Image8& img) {
    PlaneF out(img.width, img.height);
    const size_t n = static_cast<size_t>(img.width) * img.height;
    if (img.channels == 1) {
        for (size_t i = 0; i < n; ++i) out.v[i] = static_cast<float>(img.px[i]);
    } else if (img.channels == 3) {
        for (size_t i = 0; i < n; ++i) {
            const uint8_t* p = &img.px[i * 3];
            out.v[i] = 0.299f * p[0] + 0.587f * p[1] + 0.114f * p[2];
        }
    } else {
        fail("to_gray: unsupported channel count " + std::to_string(img.channels));
    }
    return out;
}

Image8 to_image8(const PlaneF& p) {
    Image8 out(p.width, p.height, 1);
    for (size_t i = 0; i < p.size(); ++i) {
        float x = std::lround(p.v[i]);
        out.px[i] = static_cast<uint8_t>(std::clamp(x, 0.f, 255.f));
    }
    return out;
}

float bilinear_at(const PlaneF& p, float x, float y) {
    x = std::clamp(x, 0.f, static_cast<float>(p.width - 1));
    y = std::clamp(y, 0.f, static_cast<float>(p.height - 1));
    int x0 = static_cast<int>(x);
    int y0 = static_cast<int>(y);
    int x1 = std::min(x0 + 1, p.width - 1);
    int y1 = std::min(y0 + 1, p.height - 1);
    float fx = x - x0, fy = y - y0;
    float top = p.at(x0, y0) + fx * (p.at(x1, y0) - p.at(x0, y0));
    float bot = p.at(x0, y1) + fx * (p.at(x1, y1) - p.at(x0, y1));
    return top + fy * (bot - top);
}

PlaneF resize_bilinear(const PlaneF& src, int dst_w, int dst_h) {
    if (src.width < 1 || src.height < 1 || dst_w < 1 || dst_h < 1)
        fail("resize_bilinear: degenerate dimensions");
    if (src.width == dst_w && src.height == dst_h) return src;
    PlaneF out(dst_w, dst_h);
    const float sx = static_cast<float>(src.width) / dst_w;
    const float sy = static_cast<float>(src.height) / dst_h;
#pragma omp parallel for schedule(static)
    for (int y = 0; y < dst_h; ++y) {
        float* o = out.row(y);
        for (int x = 0; x < dst_w; ++x) o[x] = bilinear_at(src, x * sx, y * sy);
    }
    return out;
}

Image8 resize_bilinear(const Image8& src, int dst_w, int dst_h) {
    if (src.width < 2 || src.height < 2)
        fail("resize_bilinear: source must be at least 2x2");
    if (src.width == dst_w && src.height == dst_h) return src;
    Image8 out(dst_w, dst_h, src.channels);
    const float sx = static_cast<float>(src.width) / dst_w;
    const float sy = static_cast<float>(src.height) / dst_h;
#pragma omp parallel for schedule(static)
    for (int y = 0; y < dst_h; ++y) {
        float fy = y * sy;
        int y0 = std::min(static_cast<int>(fy), src.height - 1);
        int y1 = std::min(y0 + 1, src.height - 1);
        float wy = fy - y0;
        for (int x = 0; x < dst_w; ++x) {
            float fx = x * sx;
            int x0 = std::min(static_cast<int>(fx), src.width - 1);
            int x1 = std::min(x0 + 1, src.width - 1);
            float wx = fx - x0;
            for (int c = 0; c < src.channels; ++c) {
                float top = src.at(x0, y0, c) + wx * (src.at(x1, y0, c) - src.at(x0, y0, c));
                float bot = src.at(x0, y1, c) + wx * (src.at(x1, y1, c) - src.at(x0, y1, c));
                float val = top + wy * (bot - top);
                out.at(x, y, c) = static_cast<uint8_t>(std::clamp(std::lround(val), 0l, 255l));
            }
        }
    }
    return out;
}

PlaneF gaussian_blur(const PlaneF& src, float sigma) {
    if (sigma <= 0.f) return src;
    const int radius = std::max(1, static_cast<int>(std::ceil(3.0 * sigma)));
    std::vector<double> k(2 * radius + 1);
    double sum = 0.0;
    for (int i = -radius; i <= radius; ++i) {
        k[i + radius] = std::exp(-0.5 * i * i / (static_cast<double>(sigma) * sigma));
        sum += k[i + radius];
    }
    for (double& w : k) w /= sum;

    const int W = src.width, H = src.height;
    PlaneF tmp(W, H), out(W, H);
    // horizontal pass
#pragma omp parallel for schedule(static)
    for (int y = 0; y < H; ++y) {
        const float* in = src.row(y);
        float* o = tmp.row(y);
        for (int x = 0; x < W; ++x) {
            double acc = 0.0;
            for (int i = -radius; i <= radius; ++i)
                acc += k[i + radius] * in[std::clamp(x + i, 0, W - 1)];
            o[x] = static_cast<float>(acc);
        }
    }
    // vertical pass
#pragma omp parallel for schedule(static)
    for (int y = 0; y < H; ++y) {
        float* o = out.row(y);
        for (int x = 0; x < W; ++x) {
            double acc = 0.0;
            for (int i = -radius; i <= radius; ++i)
                acc += k[i + radius] * tmp.at(x, std::clamp(y + i, 0, H - 1));
            o[x] = static_cast<float>(acc);
        }
    }
    return out;
}

}  // namespace flowgest
