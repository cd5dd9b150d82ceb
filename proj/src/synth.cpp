#include "flowgest/synth.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>

#include "flowgest/error.hpp"
#include "flowgest/image_io.hpp"
#include "flowgest/rng.hpp"

namespace flowgest::synth {

namespace fs = std::filesystem;

const char* motion_kind_name(MotionKind kind) {
    switch (kind) {
        case MotionKind::TranslateL: return "translate-left";
        case MotionKind::TranslateR: return "translate-right";
        case MotionKind::TranslateU: return "translate-up";
        case MotionKind::TranslateD: return "translate-down";
        case MotionKind::RotateCW: return "rotate-cw";
        case MotionKind::RotateCCW: return "rotate-ccw";
        case MotionKind::Expand: return "expand";
        case MotionKind::Contract: return "contract";
    }
    return "?";
}

MotionClass sample_motion_class(int id, Rng& rng) {
    if (id < 1 || id > kNumMotionClasses) fail("motion class id out of range");
    MotionClass c;
    c.id = id;
    c.kind = static_cast<MotionKind>(id);
    switch (c.kind) {
        case MotionKind::TranslateL:
        case MotionKind::TranslateR:
        case MotionKind::TranslateU:
        case MotionKind::TranslateD:
            c.magnitude = rng.uniform(1.0, 2.5);  // px/frame
            break;
        case MotionKind::RotateCW:
        case MotionKind::RotateCCW:
            c.magnitude = rng.uniform(0.008, 0.02);  // rad/frame
            break;
        case MotionKind::Expand:
        case MotionKind::Contract:
            c.magnitude = rng.uniform(0.004, 0.010);  // scale step - 1
            break;
    }
    return c;
}

Image8 gen_texture(int size, uint64_t seed) {
    if (size < 64) fail("gen_texture: size must be >= 64");
    Rng rng(seed);
    // noise octaves with cell sizes size/8 .. size/64. Energy leans toward
    // the finer octaves so two independent textures decorrelate; the grid is
    // one sample larger than the cell count so the last cell interpolates
    // instead of clamping flat.
    const float amps[] = {0.45f, 0.5f, 0.5f, 0.35f};
    PlaneF sum(size, size, 0.f);
    for (int o = 0; o < 4; ++o) {
        const int g = std::min(size / 2, 8 << o);  // 8, 16, 32, 64 cells across
        PlaneF grid(g + 1, g + 1);
        for (float& v : grid.v) v = static_cast<float>(rng.uniform());
        PlaneF up(size, size);
        const float step = static_cast<float>(g) / size;
        for (int y = 0; y < size; ++y)
            for (int x = 0; x < size; ++x) up.at(x, y) = bilinear_at(grid, x * step, y * step);
        for (size_t i = 0; i < sum.size(); ++i) sum.v[i] += amps[o] * up.v[i];
    }
    PlaneF smooth = gaussian_blur(sum, 1.0f);
    auto [lo, hi] = std::minmax_element(smooth.v.begin(), smooth.v.end());
    const float min_v = *lo;
    const float span = std::max(*hi - min_v, 1e-6f);
    for (float& v : smooth.v) v = 255.f * (v - min_v) / span;
    // +-4 levels of hash jitter: quantization would otherwise leave flat
    // plateaus around the extremes of the smooth field. The exact extremes
    // are pinned back afterwards so the full 0..255 range survives.
    Image8 out = to_image8(smooth);
    const size_t arg_lo = lo - smooth.v.begin();
    const size_t arg_hi = hi - smooth.v.begin();
    for (int y = 0; y < size; ++y)
        for (int x = 0; x < size; ++x) {
            const uint64_t h = Rng::mix(seed ^ (static_cast<uint64_t>(y) << 20) ^
                                        static_cast<uint64_t>(x));
            const int jitter = static_cast<int>(h % 9) - 4;
            out.at(x, y) = static_cast<uint8_t>(std::clamp(out.at(x, y) + jitter, 0, 255));
        }
    out.px[arg_lo] = 0;
    out.px[arg_hi] = 255;
    return out;
}

flow::FlowField analytic_flow(const MotionClass& cls, int w, int h) {
    flow::FlowField f(w, h);
    const double cx = (w - 1) / 2.0, cy = (h - 1) / 2.0;
    const double m = cls.magnitude;
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            double u = 0.0, v = 0.0;
            const double rx = x - cx, ry = y - cy;
            switch (cls.kind) {
                case MotionKind::TranslateL: u = -m; break;
                case MotionKind::TranslateR: u = m; break;
                case MotionKind::TranslateU: v = -m; break;
                case MotionKind::TranslateD: v = m; break;
                case MotionKind::RotateCW:
                case MotionKind::RotateCCW: {
                    // y grows downward, so +angle turns x toward y: clockwise
                    const double a = cls.kind == MotionKind::RotateCW ? m : -m;
                    u = std::cos(a) * rx - std::sin(a) * ry - rx;
                    v = std::sin(a) * rx + std::cos(a) * ry - ry;
                    break;
                }
                case MotionKind::Expand:
                    u = m * rx;
                    v = m * ry;
                    break;
                case MotionKind::Contract:
                    u = rx / (1.0 + m) - rx;
                    v = ry / (1.0 + m) - ry;
                    break;
            }
            f.u.at(x, y) = static_cast<float>(u);
            f.v.at(x, y) = static_cast<float>(v);
        }
    }
    return f;
}

namespace {

// Source position in frame-0 coordinates for a pixel of frame t: the
// inverse of the t-fold composed warp.
void inverse_warp(const MotionClass& cls, int t, double x, double y, double cx, double cy,
                  double& sx, double& sy) {
    const double m = cls.magnitude;
    switch (cls.kind) {
        case MotionKind::TranslateL: sx = x + m * t; sy = y; return;
        case MotionKind::TranslateR: sx = x - m * t; sy = y; return;
        case MotionKind::TranslateU: sx = x; sy = y + m * t; return;
        case MotionKind::TranslateD: sx = x; sy = y - m * t; return;
        case MotionKind::RotateCW:
        case MotionKind::RotateCCW: {
            const double a = (cls.kind == MotionKind::RotateCW ? -m : m) * t;
            const double rx = x - cx, ry = y - cy;
            sx = cx + std::cos(a) * rx - std::sin(a) * ry;
            sy = cy + std::sin(a) * rx + std::cos(a) * ry;
            return;
        }
        case MotionKind::Expand: {
            const double s = std::pow(1.0 + m, t);
            sx = cx + (x - cx) / s;
            sy = cy + (y - cy) / s;
            return;
        }
        case MotionKind::Contract: {
            const double s = std::pow(1.0 + m, t);
            sx = cx + (x - cx) * s;
            sy = cy + (y - cy) * s;
            return;
        }
    }
}

}  // namespace

SynthClip gen_clip(const MotionClass& cls, int length, int size, uint64_t seed) {
    if (length < 12) fail("gen_clip: length must be >= 12");
    // master texture large enough that no supported warp leaves textured area
    const int margin = size / 2;
    const int master_size = size + 2 * margin;
    const Image8 master8 = gen_texture(master_size, seed);
    const PlaneF master = to_gray(master8);

    SynthClip clip;
    clip.cls = cls;
    clip.flow_per_pair = analytic_flow(cls, size, size);
    clip.frames.reserve(length);

    const double cx = (size - 1) / 2.0, cy = (size - 1) / 2.0;
    for (int t = 0; t < length; ++t) {
        Image8 frame(size, size, 1);
#pragma omp parallel for schedule(static)
        for (int y = 0; y < size; ++y) {
            for (int x = 0; x < size; ++x) {
                double sx, sy;
                inverse_warp(cls, t, x, y, cx, cy, sx, sy);
                const float val = bilinear_at(master, static_cast<float>(sx + margin),
                                              static_cast<float>(sy + margin));
                frame.at(x, y) = static_cast<uint8_t>(
                    std::clamp(std::lround(val), 0l, 255l));
            }
        }
        clip.frames.push_back(std::move(frame));
    }
    return clip;
}

std::pair<Image8, Image8> gen_translation_pair(int width, int height, float dx, float dy,
                                               uint64_t seed) {
    const int margin = 16 + static_cast<int>(std::ceil(std::max(std::abs(dx), std::abs(dy))));
    const int mw = width + 2 * margin, mh = height + 2 * margin;
    const Image8 master8 = gen_texture(std::max(mw, mh), seed);
    const PlaneF master = to_gray(master8);
    Image8 a(width, height, 1), b(width, height, 1);
    for (int y = 0; y < height; ++y) {
        for (int x = 0; x < width; ++x) {
            const float pa = bilinear_at(master, static_cast<float>(x + margin),
                                         static_cast<float>(y + margin));
            const float pb = bilinear_at(master, static_cast<float>(x + margin) - dx,
                                         static_cast<float>(y + margin) - dy);
            a.at(x, y) = static_cast<uint8_t>(std::clamp(std::lround(pa), 0l, 255l));
            b.at(x, y) = static_cast<uint8_t>(std::clamp(std::lround(pb), 0l, 255l));
        }
    }
    return {std::move(a), std::move(b)};
}

std::vector<CorpusClip> plan_corpus(int per_class, int frames, uint64_t seed) {
    if (per_class < 1) fail("plan_corpus: per_class must be >= 1");
    if (frames < 12) fail("plan_corpus: frames must be >= 12");
    static const char* kSubjects[8] = {"A", "B", "C", "D", "E", "F", "G", "H"};
    Rng rng(seed);
    std::vector<CorpusClip> out;
    out.reserve(static_cast<size_t>(per_class) * kNumMotionClasses);
    for (int cls_id = 1; cls_id <= kNumMotionClasses; ++cls_id) {
        for (int k = 0; k < per_class; ++k) {
            CorpusClip c;
            c.cls = sample_motion_class(cls_id, rng);
            c.clip_seed = rng.next_u64();
            c.row.task = "Synthetic";
            c.row.subject = kSubjects[k % 8];
            c.row.trial = 1 + (k % 5);
            c.row.start = 1;
            c.row.end = frames;
            c.row.label = cls_id;
            c.row.rate = 30;
            c.row.frames = frames;
            c.row.status = ingest::ClipStatus::Kept;
            out.push_back(c);
        }
    }
    return out;
}

SynthClip materialize_clip(const CorpusClip& clip, int size) {
    return gen_clip(clip.cls, clip.row.frames, size, clip.clip_seed);
}

void write_corpus(const std::string& out_dir, int per_class, int size, int frames, uint64_t seed) {
    const auto clips = plan_corpus(per_class, frames, seed);
    fs::create_directories(out_dir);
    std::vector<ingest::ManifestRow> rows;
    rows.reserve(clips.size());
    for (const auto& c : clips) rows.push_back(c.row);
    ingest::write_manifest((fs::path(out_dir) / "manifest.csv").string(), rows);

    std::string first_error;
#pragma omp parallel for schedule(dynamic)
    for (int64_t i = 0; i < static_cast<int64_t>(clips.size()); ++i) {
        try {
            const auto& c = clips[i];
            const fs::path dir = fs::path(out_dir) / ingest::clip_dir_name(c.row);
            fs::create_directories(dir);
            const SynthClip sc = materialize_clip(c, size);
            char name[32];
            for (size_t t = 0; t < sc.frames.size(); ++t) {
                std::snprintf(name, sizeof(name), "frame_%06zu.png", t + 1);
                write_png(sc.frames[t], (dir / name).string());
            }
        } catch (const std::exception& e) {
#pragma omp critical
            if (first_error.empty()) first_error = e.what();
        }
    }
    if (!first_error.empty()) fail(first_error);
}

}  // namespace flowgest::synth
