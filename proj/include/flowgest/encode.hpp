#pragma once

#include <string>
#include <utility>
#include <vector>

#include "flowgest/flow.hpp"

namespace flowgest::encode {

inline constexpr float kDefaultMagCap = 20.f;  // px

// Magnitude >= 0, direction in [0, 2pi); direction at zero magnitude is 0.
struct PolarFlow {
    PlaneF magnitude, direction;
};

enum class PlaneKind { Magnitude, Direction };

enum class PlaneFormat { Png, Jpeg };

struct QuantizedPlane {
    int width = 0, height = 0;
    std::vector<uint8_t> values;
    PlaneKind kind = PlaneKind::Magnitude;

    QuantizedPlane() = default;
    QuantizedPlane(int w, int h, PlaneKind k)
        : width(w), height(h), values(static_cast<size_t>(w) * h, 0), kind(k) {}
    uint8_t at(int x, int y) const { return values[static_cast<size_t>(y) * width + x]; }
};

PolarFlow flow_to_polar(const flow::FlowField& field);

// u = m cos(theta), v = m sin(theta)
flow::FlowField polar_to_flow(const PolarFlow& polar);

// Fixed-range mapping: magnitude clips at mag_cap and scales to 0..255,
// direction maps [0, 2pi) onto 0..255. Round half away from zero.
std::pair<QuantizedPlane, QuantizedPlane> quantize(const PolarFlow& polar,
                                                   float mag_cap = kDefaultMagCap);

// Midpoint dequantization, inverse of the mapping above.
PlaneF dequantize(const QuantizedPlane& plane, float mag_cap = kDefaultMagCap);

void write_plane(const QuantizedPlane& plane, PlaneFormat format, const std::string& path,
                 int jpeg_quality = 90);
QuantizedPlane read_plane(const std::string& path, PlaneKind kind);

// `<clip>/mag_%04d.png` / `dir_%04d.png`, index = first frame of the pair.
std::string plane_file_name(PlaneKind kind, int first_frame_index, PlaneFormat format);

}  // namespace flowgest::encode
