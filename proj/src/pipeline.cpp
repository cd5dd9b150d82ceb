#include "flowgest/pipeline.hpp"

#include <cmath>

#include "flowgest/error.hpp"
#include "flowgest/image.hpp"

namespace flowgest::pipeline {

namespace {

// one 8-bit plane -> one [0,1] float channel at 256x256
void put_channel(const encode::QuantizedPlane& plane, float* dst) {
    if (plane.width == kStackSize && plane.height == kStackSize) {
        for (size_t i = 0; i < plane.values.size(); ++i)
            dst[i] = plane.values[i] * (1.f / 255.f);
        return;
    }
    PlaneF raw(plane.width, plane.height);
    for (size_t i = 0; i < plane.values.size(); ++i)
        raw.v[i] = static_cast<float>(plane.values[i]);
    PlaneF scaled = resize_bilinear(raw, kStackSize, kStackSize);
    for (size_t i = 0; i < scaled.size(); ++i) dst[i] = scaled.v[i] * (1.f / 255.f);
}

}  // namespace

FlowStack build_stack(const ClipPlanes& planes, int start_pair, const std::string& clip_name) {
    if (planes.mag.size() != planes.dir.size())
        fail("build_stack: magnitude/direction plane counts differ");
    if (start_pair < 0 || start_pair + kStackPairs > planes.pairs())
        fail("build_stack: clip '" + clip_name + "' has " + std::to_string(planes.pairs()) +
             " pairs, cannot start a " + std::to_string(kStackPairs) + "-pair stack at " +
             std::to_string(start_pair));
    FlowStack stack;
    stack.data.resize(static_cast<size_t>(kStackChannels) * kStackSize * kStackSize);
    const size_t plane_sz = static_cast<size_t>(kStackSize) * kStackSize;
    for (int p = 0; p < kStackPairs; ++p) {
        put_channel(planes.mag[start_pair + p], stack.data.data() + (2 * p) * plane_sz);
        put_channel(planes.dir[start_pair + p], stack.data.data() + (2 * p + 1) * plane_sz);
    }
    return stack;
}

FlowChunk crop_stack(const FlowStack& stack, const CropSpec& crop, bool flip) {
    if (crop.x < 0 || crop.x > kMaxCropOffset || crop.y < 0 || crop.y > kMaxCropOffset)
        fail("crop_stack: crop offsets must be in 0.." + std::to_string(kMaxCropOffset));
    FlowChunk chunk;
    chunk.data.resize(static_cast<size_t>(kStackChannels) * kCropSize * kCropSize);
    for (int c = 0; c < kStackChannels; ++c) {
        const bool is_direction = (c % 2) == 1;
        for (int y = 0; y < kCropSize; ++y) {
            float* dst = &chunk.data[(static_cast<size_t>(c) * kCropSize + y) * kCropSize];
            for (int x = 0; x < kCropSize; ++x) {
                const int sx = flip ? crop.x + (kCropSize - 1 - x) : crop.x + x;
                float v = stack.at(c, crop.y + y, sx);
                if (flip && is_direction && v > 0.f) v = 1.f - v;  // theta -> 2pi - theta
                dst[x] = v;
            }
        }
    }
    return chunk;
}

int sample_train_start(int clip_pairs, Rng& rng) {
    if (clip_pairs < kStackPairs)
        fail("sample_train_start: clip has fewer than " + std::to_string(kStackPairs) + " pairs");
    return static_cast<int>(rng.uniform_u32(clip_pairs - kStackPairs + 1));
}

CropSpec sample_crop(Rng& rng) {
    CropSpec c;
    c.x = static_cast<int>(rng.uniform_u32(kMaxCropOffset + 1));
    c.y = static_cast<int>(rng.uniform_u32(kMaxCropOffset + 1));
    return c;
}

TrainSample sample_train_chunk(int clip_pairs, Rng& rng, bool allow_flip) {
    TrainSample s;
    s.start_pair = sample_train_start(clip_pairs, rng);
    s.crop = sample_crop(rng);
    s.flip = allow_flip && rng.coin();
    return s;
}

std::vector<int> sample_test_chunks(int clip_pairs, int n) {
    if (clip_pairs < kStackPairs)
        fail("sample_test_chunks: clip has fewer than " + std::to_string(kStackPairs) + " pairs");
    if (n < 1) fail("sample_test_chunks: n must be >= 1");
    const int last_start = clip_pairs - kStackPairs;
    std::vector<int> starts(n);
    if (n == 1) {
        starts[0] = static_cast<int>(std::lround(last_start / 2.0));
        return starts;
    }
    for (int k = 0; k < n; ++k)
        starts[k] = static_cast<int>(std::lround(static_cast<double>(k) * last_start / (n - 1)));
    return starts;
}

}  // namespace flowgest::pipeline
