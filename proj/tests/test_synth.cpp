#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <map>

#include "flowgest/error.hpp"
#include "flowgest/ref/reference.hpp"
#include "flowgest/synth.hpp"
#include "support/test_util.hpp"

using namespace flowgest;
using namespace flowgest::synth;

TEST_CASE("gen_texture determinism, range and contrast") {
    const Image8 a = gen_texture(128, 5);
    const Image8 b = gen_texture(128, 5);
    CHECK(a.px == b.px);

    // full dynamic range and healthy contrast
    int lo = 255, hi = 0;
    double sum = 0, sq = 0;
    for (uint8_t v : a.px) {
        lo = std::min<int>(lo, v);
        hi = std::max<int>(hi, v);
        sum += v;
        sq += static_cast<double>(v) * v;
    }
    CHECK(lo == 0);
    CHECK(hi == 255);
    const double n = static_cast<double>(a.px.size());
    const double stddev = std::sqrt(sq / n - (sum / n) * (sum / n));
    MESSAGE("texture std: " << stddev);
    CHECK(stddev > 30.0);

    CHECK_THROWS_AS(gen_texture(32, 1), Error);
}

TEST_CASE("gen_texture has no flat 8x8 regions") {
    const Image8 tex = gen_texture(128, 17);
    for (int by = 0; by + 8 <= 128; by += 8)
        for (int bx = 0; bx + 8 <= 128; bx += 8) {
            int lo = 255, hi = 0;
            for (int y = by; y < by + 8; ++y)
                for (int x = bx; x < bx + 8; ++x) {
                    lo = std::min<int>(lo, tex.at(x, y));
                    hi = std::max<int>(hi, tex.at(x, y));
                }
            CHECK(hi - lo >= 3);
        }
}

TEST_CASE("gen_texture: different seeds decorrelate (NCC < 0.2 over 100 pairs)") {
    auto ncc = [](const Image8& a, const Image8& b) {
        double ma = 0, mb = 0;
        const size_t n = a.px.size();
        for (size_t i = 0; i < n; ++i) {
            ma += a.px[i];
            mb += b.px[i];
        }
        ma /= n;
        mb /= n;
        double num = 0, da = 0, db = 0;
        for (size_t i = 0; i < n; ++i) {
            num += (a.px[i] - ma) * (b.px[i] - mb);
            da += (a.px[i] - ma) * (a.px[i] - ma);
            db += (b.px[i] - mb) * (b.px[i] - mb);
        }
        return num / std::sqrt(da * db);
    };
    for (int pair = 0; pair < 100; ++pair) {
        const Image8 a = gen_texture(64, 1000 + 2 * pair);
        const Image8 b = gen_texture(64, 1001 + 2 * pair);
        CHECK(std::abs(ncc(a, b)) < 0.2);
    }
}

TEST_CASE("analytic flow fields per motion class") {
    // translation: constant field
    const auto tr = analytic_flow({2, MotionKind::TranslateR, 2.0}, 64, 64);
    for (size_t i = 0; i < tr.u.size(); ++i) {
        CHECK(tr.u.v[i] == doctest::Approx(2.0));
        CHECK(tr.v.v[i] == doctest::Approx(0.0));
    }

    // rotation: zero at center, magnitude grows with radius
    const auto rot = analytic_flow({5, MotionKind::RotateCW, 0.02}, 65, 65);
    const int c = 32;
    CHECK(std::abs(rot.u.at(c, c)) < 1e-9);
    CHECK(std::abs(rot.v.at(c, c)) < 1e-9);
    auto mag_at = [&](int x, int y) {
        return std::hypot(rot.u.at(x, y), rot.v.at(x, y));
    };
    CHECK(mag_at(c + 10, c) > mag_at(c + 5, c));
    CHECK(mag_at(c + 30, c) > mag_at(c + 10, c));
    CHECK(mag_at(c + 10, c) == doctest::Approx(10 * 2 * std::sin(0.01)).epsilon(1e-6));

    // expansion: divergent, zero at center, pointing outward
    const auto ex = analytic_flow({7, MotionKind::Expand, 0.01}, 65, 65);
    CHECK(std::abs(ex.u.at(c, c)) < 1e-9);
    CHECK(ex.u.at(c + 10, c) == doctest::Approx(0.1).epsilon(1e-6));
    CHECK(ex.u.at(c - 10, c) == doctest::Approx(-0.1).epsilon(1e-6));
    CHECK(ex.v.at(c, c + 10) == doctest::Approx(0.1).epsilon(1e-6));
}

TEST_CASE("gen_clip frames move by the analytic field (flow oracle)") {
    flow::FarnebackParams params;
    // translations up to 2.5 px/frame: mean interior EPE < 0.5 px
    for (int id = 1; id <= 4; ++id) {
        Rng rng(500 + id);
        const MotionClass cls = sample_motion_class(id, rng);
        const SynthClip clip = gen_clip(cls, 12, 128, 600 + id);
        const auto est = flow::estimate_flow(clip.frames[5], clip.frames[6], params);
        const double epe = ref::endpoint_error(est, clip.flow_per_pair, 10);
        MESSAGE(motion_kind_name(cls.kind) << " mag " << cls.magnitude << ": epe " << epe);
        CHECK(epe < 0.5);
    }
    // rotations <= 0.02 rad and scalings: < 0.7 px
    for (int id = 5; id <= 8; ++id) {
        Rng rng(500 + id);
        const MotionClass cls = sample_motion_class(id, rng);
        const SynthClip clip = gen_clip(cls, 12, 128, 600 + id);
        const auto est = flow::estimate_flow(clip.frames[5], clip.frames[6], params);
        const double epe = ref::endpoint_error(est, clip.flow_per_pair, 10);
        MESSAGE(motion_kind_name(cls.kind) << " mag " << cls.magnitude << ": epe " << epe);
        CHECK(epe < 0.7);
    }
}

TEST_CASE("gen_clip determinism and length rule") {
    const MotionClass cls{3, MotionKind::TranslateU, 1.5};
    const SynthClip a = gen_clip(cls, 12, 96, 42);
    const SynthClip b = gen_clip(cls, 12, 96, 42);
    REQUIRE(a.frames.size() == 12);
    for (size_t t = 0; t < a.frames.size(); ++t) CHECK(a.frames[t].px == b.frames[t].px);
    CHECK_THROWS_AS(gen_clip(cls, 11, 96, 42), Error);
}

TEST_CASE("plan_corpus counting, balance and format compatibility") {
    const auto clips = plan_corpus(40, 30, 7);
    CHECK(clips.size() == 320);

    std::map<int, int> per_trial;
    std::map<std::pair<int, int>, int> per_trial_class;
    for (const auto& c : clips) {
        ++per_trial[c.row.trial];
        ++per_trial_class[{c.row.trial, c.row.label}];
        CHECK(c.row.frames == 30);
        CHECK(c.row.status == ingest::ClipStatus::Kept);
    }
    for (int t = 1; t <= 5; ++t) CHECK(per_trial[t] == 64);
    for (int t = 1; t <= 5; ++t)
        for (int cls = 1; cls <= 8; ++cls) CHECK(per_trial_class[{t, cls}] == 8);  // exact balance

    // deterministic per seed
    const auto again = plan_corpus(40, 30, 7);
    for (size_t i = 0; i < clips.size(); ++i) {
        CHECK(clips[i].clip_seed == again[i].clip_seed);
        CHECK(clips[i].cls.magnitude == again[i].cls.magnitude);
    }
}

TEST_CASE("write_corpus emits the ingest layout") {
    testutil::TempDir tmp("corpus");
    write_corpus(tmp.str(), 1, 64, 12, 3);
    const auto manifest = ingest::read_manifest(tmp.file("manifest.csv"));
    REQUIRE(manifest.size() == 8);
    for (const auto& row : manifest) {
        CHECK(row.task == "Synthetic");
        CHECK(row.frames == 12);
        // every frame file exists
        const auto dir = tmp.path() / ingest::clip_dir_name(row);
        for (int f = 1; f <= row.frames; ++f) {
            char name[32];
            std::snprintf(name, sizeof(name), "frame_%06d.png", f);
            CHECK(std::filesystem::exists(dir / name));
        }
    }
}
