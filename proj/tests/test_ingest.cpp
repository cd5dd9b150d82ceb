#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "flowgest/error.hpp"
#include "flowgest/ingest.hpp"
#include "flowgest/ref/reference.hpp"
#include "flowgest/rng.hpp"
#include "support/test_util.hpp"

using namespace flowgest;
using namespace flowgest::ingest;

TEST_CASE("parse_transcript maps lines to segments") {
    const auto segs = parse_transcript("80 328 G1\n329 385 G5", "Suturing", "B", 1);
    REQUIRE(segs.size() == 2);
    CHECK(segs[0].start_frame == 80);
    CHECK(segs[0].end_frame == 328);
    CHECK(segs[0].label == 1);
    CHECK(segs[1].start_frame == 329);
    CHECK(segs[1].end_frame == 385);
    CHECK(segs[1].label == 5);
    CHECK(segs[0].task == "Suturing");
    CHECK(segs[0].subject == "B");
    CHECK(segs[0].trial == 1);
}

TEST_CASE("parse_transcript edge cases") {
    CHECK(parse_transcript("", "Suturing", "B", 1).empty());
    CHECK(parse_transcript("\n\n", "Suturing", "B", 1).empty());

    // unknown label names the token
    CHECK_THROWS_WITH_AS(parse_transcript("80 328 G99", "Suturing", "B", 1),
                         doctest::Contains("G99"), Error);
    // malformed line carries the line number
    CHECK_THROWS_WITH_AS(parse_transcript("80 328 G1\n12 34", "Suturing", "B", 1),
                         doctest::Contains("line 2"), Error);
    CHECK_THROWS_AS(parse_transcript("80 328 G1 junk", "Suturing", "B", 1), Error);
    // overlap
    CHECK_THROWS_WITH_AS(parse_transcript("80 328 G1\n300 340 G2", "Suturing", "B", 1),
                         doctest::Contains("overlap"), Error);
    // unsorted input comes back sorted
    const auto segs = parse_transcript("50 60 G2\n10 20 G1", "Suturing", "B", 1);
    CHECK(segs[0].start_frame == 10);
}

TEST_CASE("parse / serialize round-trip") {
    Rng rng(42);
    for (int iter = 0; iter < 50; ++iter) {
        std::vector<GestureSegment> segs;
        int cursor = 1;
        const int n = 1 + rng.uniform_u32(10);
        for (int i = 0; i < n; ++i) {
            GestureSegment s;
            s.task = "KnotTying";
            s.subject = "C";
            s.trial = 2;
            s.start_frame = cursor + rng.uniform_u32(20);
            s.end_frame = s.start_frame + rng.uniform_u32(100);
            s.label = 1 + rng.uniform_u32(15);
            cursor = s.end_frame + 1;
            segs.push_back(s);
        }
        const auto parsed = parse_transcript(serialize_transcript(segs), "KnotTying", "C", 2);
        REQUIRE(parsed.size() == segs.size());
        for (size_t i = 0; i < segs.size(); ++i) {
            CHECK(parsed[i].start_frame == segs[i].start_frame);
            CHECK(parsed[i].end_frame == segs[i].end_frame);
            CHECK(parsed[i].label == segs[i].label);
        }
    }
}

namespace {
GestureSegment seg_of_duration(int frames) {
    GestureSegment s;
    s.task = "Suturing";
    s.subject = "B";
    s.trial = 1;
    s.start_frame = 100;
    s.end_frame = 100 + frames - 1;
    s.label = 3;
    return s;
}
}  // namespace

TEST_CASE("plan_clip branch examples") {
    auto m80 = plan_clip(seg_of_duration(80));
    CHECK(m80.sample_rate_hz == 30);
    CHECK(m80.frame_count == 80);
    CHECK(m80.status == ClipStatus::Kept);

    auto m24 = plan_clip(seg_of_duration(24));  // 24 * 40/30 = 32
    CHECK(m24.sample_rate_hz == 40);
    CHECK(m24.frame_count == 32);
    CHECK(m24.status == ClipStatus::Kept);

    auto m9 = plan_clip(seg_of_duration(9));  // 12 < 15
    CHECK(m9.sample_rate_hz == 40);
    CHECK(m9.frame_count == 12);
    CHECK(m9.status == ClipStatus::Excluded);
}

TEST_CASE("plan_clip rules, exhaustive sweep 1..200") {
    for (int d = 1; d <= 200; ++d) {
        const auto m = plan_clip(seg_of_duration(d));
        const bool upsampled = d < 30;
        CHECK(m.sample_rate_hz == (upsampled ? 40 : 30));
        const int expect = upsampled ? static_cast<int>(std::lround(d * 40.0 / 30.0)) : d;
        CHECK(m.frame_count == expect);
        CHECK((m.status == ClipStatus::Excluded) == (m.frame_count < 15));
    }
}

TEST_CASE("resample_indices formula and oracle") {
    // identity at 30 Hz
    auto id = resample_indices(30, 30, 30);
    for (int k = 0; k < 30; ++k) CHECK(id[k] == k);

    // 24 frames -> 32, floor(3k/4)
    auto up = resample_indices(24, 30, 40);
    REQUIRE(up.size() == 32);
    for (int k = 0; k < 32; ++k) CHECK(up[k] == (k * 3) / 4);

    // minimal case 3 -> 4
    auto tiny = resample_indices(3, 30, 40);
    CHECK(tiny == std::vector<int>{0, 0, 1, 2});

    // time-grid intersection oracle agrees everywhere
    for (int n = 1; n <= 200; ++n) {
        CHECK(resample_indices(n, 30, 40) == ref::resample_time_grid(n, 30, 40));
    }
}

TEST_CASE("resampled frame count property, n in 1..1000") {
    for (int n = 1; n <= 1000; ++n) {
        for (int target : {30, 40}) {
            const auto idx = resample_indices(n, 30, target);
            CHECK(static_cast<int>(idx.size()) ==
                  static_cast<int>(std::lround(n * static_cast<double>(target) / 30.0)));
            for (size_t k = 1; k < idx.size(); ++k) CHECK(idx[k] >= idx[k - 1]);  // monotonic
        }
    }
}

TEST_CASE("resample_frames errors and identity") {
    CHECK_THROWS_AS(resample_frames({}, 40), Error);
    std::vector<Image8> frames(5, Image8(4, 4, 1, 7));
    CHECK(resample_frames(frames, 30).size() == 5);
    CHECK(resample_frames(frames, 40).size() == 7);  // round(5*4/3)
}

TEST_CASE("resize_frame") {
    // 640x480 gradient: output pixel = source sample at exactly 2x coords
    Image8 big(640, 480, 1);
    for (int y = 0; y < 480; ++y)
        for (int x = 0; x < 640; ++x) big.at(x, y) = static_cast<uint8_t>((x * 7 + y * 13) % 251);
    const Image8 small = resize_frame(big);
    REQUIRE(small.width == 320);
    REQUIRE(small.height == 240);
    for (int y = 0; y < 240; y += 7)
        for (int x = 0; x < 320; x += 11) CHECK(small.at(x, y) == big.at(2 * x, 2 * y));

    // identity is bitwise
    Image8 same(320, 240, 1);
    for (size_t i = 0; i < same.px.size(); ++i) same.px[i] = static_cast<uint8_t>(i * 31 % 256);
    CHECK(resize_frame(same).px == same.px);

    // constants stay constant
    const Image8 flat = resize_frame(Image8(100, 90, 1, 42));
    for (uint8_t v : flat.px) CHECK(v == 42);

    CHECK_THROWS_AS(resize_frame(Image8(1, 1, 1)), Error);
}

TEST_CASE("manifest round-trip and clip naming") {
    testutil::TempDir tmp("manifest");
    std::vector<ManifestRow> rows;
    Rng rng(7);
    for (int i = 0; i < 20; ++i) {
        ManifestRow r;
        r.task = i % 2 ? "Suturing" : "KnotTying";
        r.subject = std::string(1, static_cast<char>('A' + i % 8));
        r.trial = 1 + i % 5;
        r.start = 1 + static_cast<int>(rng.uniform_u32(1000));
        r.end = r.start + 20 + static_cast<int>(rng.uniform_u32(100));
        r.label = 1 + i % 15;
        r.rate = i % 3 ? 30 : 40;
        r.frames = r.end - r.start + 1;
        r.status = i % 7 ? ClipStatus::Kept : ClipStatus::Excluded;
        rows.push_back(r);
    }
    const std::string path = tmp.file("manifest.csv");
    write_manifest(path, rows);
    const auto back = read_manifest(path);
    REQUIRE(back.size() == rows.size());
    for (size_t i = 0; i < rows.size(); ++i) {
        CHECK(back[i].task == rows[i].task);
        CHECK(back[i].subject == rows[i].subject);
        CHECK(back[i].trial == rows[i].trial);
        CHECK(back[i].start == rows[i].start);
        CHECK(back[i].end == rows[i].end);
        CHECK(back[i].label == rows[i].label);
        CHECK(back[i].rate == rows[i].rate);
        CHECK(back[i].frames == rows[i].frames);
        CHECK(back[i].status == rows[i].status);
        CHECK(clip_dir_name(back[i]) == clip_dir_name(rows[i]));
    }
    CHECK_THROWS_AS(read_manifest(tmp.file("missing.csv")), Error);
}

TEST_CASE("gesture vocabulary") {
    // 15 labels; G2 and G12 share text but stay distinct ids
    CHECK(std::string(gesture_description(2)) == gesture_description(12));
    for (int id = 1; id <= 15; ++id) CHECK(gesture_description(id) != nullptr);
    CHECK_THROWS_AS(gesture_description(0), Error);
    CHECK_THROWS_AS(gesture_description(16), Error);
}
