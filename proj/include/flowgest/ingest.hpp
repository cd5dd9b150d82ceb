#pragma once

#include <string>
#include <vector>

#include "flowgest/image.hpp"

namespace flowgest::ingest {

inline constexpr int kNumGestures = 15;

// G1..G15. G2 and G12 share a description but stay distinct classes.
const char* gesture_description(int id);

struct GestureSegment {
    std::string task;     // Suturing, NeedlePassing, KnotTying, Synthetic
    std::string subject;  // short identifier, e.g. "B"
    int trial = 1;
    int start_frame = 1;  // 1-based, inclusive
    int end_frame = 1;
    int label = 1;  // gesture id 1..15

    int duration_frames() const { return end_frame - start_frame + 1; }
};

enum class ClipStatus { Kept, Excluded };

struct ClipMeta {
    GestureSegment segment;
    int sample_rate_hz = 30;  // 30 or 40
    int frame_count = 0;
    ClipStatus status = ClipStatus::Kept;
};

// Annotation line format: `start end G<k>`, whitespace separated. Output is
// sorted by start frame; overlapping segments are rejected.
std::vector<GestureSegment> parse_transcript(const std::string& text,
                                             const std::string& task,
                                             const std::string& subject, int trial);

// Inverse of parse_transcript, one `start end G<k>` line per segment.
std::string serialize_transcript(const std::vector<GestureSegment>& segments);

// Clips shorter than 30 frames at the 30 Hz source are re-extracted at
// 40 Hz; anything still under 15 frames is excluded.
ClipMeta plan_clip(const GestureSegment& segment, int source_rate_hz = 30);

// Nearest-neighbour temporal resampling: output k takes source frame
// floor(k * source / target); count = round(n * target / source).
std::vector<int> resample_indices(int n, int source_rate_hz, int target_rate_hz);
std::vector<Image8> resample_frames(const std::vector<Image8>& frames, int target_rate_hz);

// Bilinear resize to the ingestion resolution.
Image8 resize_frame(const Image8& image, int width = 320, int height = 240);

struct ManifestRow {
    std::string task;
    std::string subject;
    int trial = 1;
    int start = 1;
    int end = 1;
    int label = 1;
    int rate = 30;
    int frames = 0;
    ClipStatus status = ClipStatus::Kept;

    int pairs() const { return frames - 1; }
};

ManifestRow manifest_row(const ClipMeta& meta);

// Directory holding a clip's frames (and later its flow planes), derived
// from the manifest fields so the CSV stays the single source of truth.
std::string clip_dir_name(const ManifestRow& row);

// CSV with header `task,subject,trial,start,end,label,rate,frames,status`.
void write_manifest(const std::string& path, const std::vector<ManifestRow>& rows);
std::vector<ManifestRow> read_manifest(const std::string& path);

}  // namespace flowgest::ingest
