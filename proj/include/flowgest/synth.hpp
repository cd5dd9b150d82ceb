#pragma once

#include <string>
#include <vector>

#include "flowgest/flow.hpp"
#include "flowgest/image.hpp"
#include "flowgest/ingest.hpp"
#include "flowgest/rng.hpp"

namespace flowgest::synth {

inline constexpr int kNumMotionClasses = 8;

enum class MotionKind {
    TranslateL = 1,
    TranslateR,
    TranslateU,
    TranslateD,
    RotateCW,
    RotateCCW,
    Expand,
    Contract,
};

// Class id doubles as the gesture label in the manifest. magnitude is
// px/frame for translations, rad/frame for rotations, and the per-frame
// scale factor minus one for expand/contract.
struct MotionClass {
    int id = 1;
    MotionKind kind = MotionKind::TranslateL;
    double magnitude = 1.0;
};

const char* motion_kind_name(MotionKind kind);

// Randomized per-clip magnitude within the class range, so the classifier
// has to read the motion pattern rather than a single flow value.
MotionClass sample_motion_class(int id, Rng& rng);

// Band-limited random texture: bilinearly upsampled noise octaves, lightly
// blurred, normalized to the full 0..255 range.
Image8 gen_texture(int size, uint64_t seed);

struct SynthClip {
    std::vector<Image8> frames;
    MotionClass cls;
    // ground truth of every consecutive pair; the warps compose so the
    // field is the same for each pair
    flow::FlowField flow_per_pair;
};

// The ground-truth displacement of one frame step at frame size w x h.
flow::FlowField analytic_flow(const MotionClass& cls, int w, int h);

// Frame t samples a larger master texture under the t-fold composed warp,
// so no frame ever reads outside textured area for the supported magnitude
// ranges. Backward mapping, bilinear, edge clamp.
SynthClip gen_clip(const MotionClass& cls, int length, int size, uint64_t seed);

// Textured pair whose second frame is the first translated by (dx, dy);
// both sampled from one master so the ground truth holds to the border.
std::pair<Image8, Image8> gen_translation_pair(int width, int height, float dx, float dy,
                                               uint64_t seed);

struct CorpusClip {
    ingest::ManifestRow row;
    MotionClass cls;
    uint64_t clip_seed = 0;
};

// 8 x per_class clips over 8 pseudo-subjects (A..H) and 5 pseudo-trials,
// class balance exact per trial. Frames are generated lazily from
// CorpusClip by materialize_clip.
std::vector<CorpusClip> plan_corpus(int per_class, int frames, uint64_t seed);
SynthClip materialize_clip(const CorpusClip& clip, int size);

// Writes frames + manifest.csv in the ingest layout.
void write_corpus(const std::string& out_dir, int per_class, int size, int frames, uint64_t seed);

}  // namespace flowgest::synth
