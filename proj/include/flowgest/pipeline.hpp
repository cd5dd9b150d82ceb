#pragma once

#include <string>
#include <vector>

#include "flowgest/encode.hpp"
#include "flowgest/rng.hpp"

namespace flowgest::pipeline {

inline constexpr int kStackPairs = 10;   // L consecutive frame pairs
inline constexpr int kStackChannels = 2 * kStackPairs;
inline constexpr int kStackSize = 256;   // rescale target before cropping
inline constexpr int kCropSize = 224;
inline constexpr int kMaxCropOffset = kStackSize - kCropSize;  // 32
inline constexpr int kTestChunksPerClip = 20;

// Top-left offsets of a 224 crop inside the 256 stack.
struct CropSpec {
    int x = kMaxCropOffset / 2;
    int y = kMaxCropOffset / 2;
};

inline CropSpec center_crop() { return CropSpec{}; }

// Stored planes of one clip; mag[i]/dir[i] belong to frame pair i.
struct ClipPlanes {
    std::vector<encode::QuantizedPlane> mag, dir;
    int pairs() const { return static_cast<int>(mag.size()); }
};

// 20 x 256 x 256, channel-major, time-major channel order
// (pair0 mag, pair0 dir, pair1 mag, ...), values in [0, 1].
struct FlowStack {
    std::vector<float> data;
    float at(int c, int y, int x) const {
        return data[(static_cast<size_t>(c) * kStackSize + y) * kStackSize + x];
    }
};

// 20 x 224 x 224 crop of a stack.
struct FlowChunk {
    std::vector<float> data;
    float at(int c, int y, int x) const {
        return data[(static_cast<size_t>(c) * kCropSize + y) * kCropSize + x];
    }
};

FlowStack build_stack(const ClipPlanes& planes, int start_pair,
                      const std::string& clip_name = "");

// Horizontal flip mirrors the planes, leaves magnitude values alone and
// remaps direction theta -> (2pi - theta) mod 2pi in quantized space.
FlowChunk crop_stack(const FlowStack& stack, const CropSpec& crop, bool flip = false);

struct TrainSample {
    int start_pair = 0;
    CropSpec crop;
    bool flip = false;
};

int sample_train_start(int clip_pairs, Rng& rng);
CropSpec sample_crop(Rng& rng);
TrainSample sample_train_chunk(int clip_pairs, Rng& rng, bool allow_flip = false);

// Deterministic evenly spaced start positions: round(k * S / (n - 1)) for
// k = 0..n-1 with S the last valid start; duplicates allowed when S < n-1.
std::vector<int> sample_test_chunks(int clip_pairs, int n = kTestChunksPerClip);

}  // namespace flowgest::pipeline
