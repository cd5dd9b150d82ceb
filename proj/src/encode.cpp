#include "flowgest/encode.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "flowgest/error.hpp"
#include "flowgest/image_io.hpp"

namespace flowgest::encode {

namespace {
constexpr double kTwoPi = 2.0 * 3.14159265358979323846;
}

PolarFlow flow_to_polar(const flow::FlowField& field) {
    PolarFlow p;
    p.magnitude = PlaneF(field.width(), field.height());
    p.direction = PlaneF(field.width(), field.height());
    const size_t n = p.magnitude.size();
#pragma omp parallel for schedule(static)
    for (int64_t i = 0; i < static_cast<int64_t>(n); ++i) {
        const float u = field.u.v[i];
        const float v = field.v.v[i];
        const float m = std::sqrt(u * u + v * v);
        double theta = 0.0;
        if (m > 0.f) {
            theta = std::atan2(static_cast<double>(v), static_cast<double>(u));
            if (theta < 0.0) theta += kTwoPi;
            if (theta >= kTwoPi) theta = 0.0;
        }
        p.magnitude.v[i] = m;
        p.direction.v[i] = static_cast<float>(theta);
    }
    return p;
}

flow::FlowField polar_to_flow(const PolarFlow& polar) {
    flow::FlowField f(polar.magnitude.width, polar.magnitude.height);
    for (size_t i = 0; i < f.u.size(); ++i) {
        const float m = polar.magnitude.v[i];
        const float t = polar.direction.v[i];
        f.u.v[i] = m * std::cos(t);
        f.v.v[i] = m * std::sin(t);
    }
    return f;
}

std::pair<QuantizedPlane, QuantizedPlane> quantize(const PolarFlow& polar, float mag_cap) {
    if (!(mag_cap > 0.f)) fail("quantize: mag_cap must be positive");
    const int W = polar.magnitude.width, H = polar.magnitude.height;
    QuantizedPlane mag(W, H, PlaneKind::Magnitude);
    QuantizedPlane dir(W, H, PlaneKind::Direction);
    for (size_t i = 0; i < polar.magnitude.size(); ++i) {
        const float m = std::min(polar.magnitude.v[i], mag_cap);
        mag.values[i] = static_cast<uint8_t>(
            std::clamp<long>(std::lround(255.0 * m / mag_cap), 0, 255));
        double theta = polar.direction.v[i];
        if (theta >= kTwoPi) theta -= kTwoPi;
        dir.values[i] = static_cast<uint8_t>(
            std::clamp<long>(std::lround(255.0 * theta / kTwoPi), 0, 255));
    }
    return {std::move(mag), std::move(dir)};
}

PlaneF dequantize(const QuantizedPlane& plane, float mag_cap) {
    PlaneF out(plane.width, plane.height);
    const double scale = plane.kind == PlaneKind::Magnitude ? mag_cap / 255.0 : kTwoPi / 255.0;
    for (size_t i = 0; i < plane.values.size(); ++i)
        out.v[i] = static_cast<float>(plane.values[i] * scale);
    return out;
}

void write_plane(const QuantizedPlane& plane, PlaneFormat format, const std::string& path,
                 int jpeg_quality) {
    Image8 img(plane.width, plane.height, 1);
    img.px = plane.values;
    if (format == PlaneFormat::Png)
        write_png(img, path);
    else
        write_jpeg(img, path, jpeg_quality);
}

QuantizedPlane read_plane(const std::string& path, PlaneKind kind) {
    Image8 img = read_image(path);
    if (img.channels != 1) fail("'" + path + "': flow planes must be grayscale");
    QuantizedPlane plane(img.width, img.height, kind);
    plane.values = std::move(img.px);
    return plane;
}

std::string plane_file_name(PlaneKind kind, int first_frame_index, PlaneFormat format) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%s_%04d.%s",
                  kind == PlaneKind::Magnitude ? "mag" : "dir", first_frame_index,
                  format == PlaneFormat::Png ? "png" : "jpg");
    return buf;
}

}  // namespace flowgest::encode
