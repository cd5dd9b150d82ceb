#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <chrono>
#include <cmath>
#include <cstring>

#include "flowgest/error.hpp"
#include "flowgest/flow.hpp"
#include "flowgest/parallel.hpp"
#include "flowgest/ref/reference.hpp"
#include "flowgest/rng.hpp"
#include "flowgest/synth.hpp"
#include "support/test_util.hpp"

using namespace flowgest;
using namespace flowgest::flow;

namespace {

PlaneF textured_plane(int w, int h, uint64_t seed) {
    const Image8 tex = synth::gen_texture(std::max({w, h, 64}), seed);
    PlaneF p(w, h);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) p.at(x, y) = static_cast<float>(tex.at(x, y));
    return p;
}

FlowField constant_field(int w, int h, float u, float v) {
    FlowField f(w, h);
    std::fill(f.u.v.begin(), f.u.v.end(), u);
    std::fill(f.v.v.begin(), f.v.v.end(), v);
    return f;
}

}  // namespace

TEST_CASE("gaussian_pyramid level sizes") {
    FarnebackParams p;
    const auto pyr = gaussian_pyramid(PlaneF(320, 240, 1.f), p);
    REQUIRE(pyr.size() == 3);
    CHECK(pyr[0].width == 320);
    CHECK(pyr[0].height == 240);
    CHECK(pyr[1].width == 160);
    CHECK(pyr[1].height == 120);
    CHECK(pyr[2].width == 80);
    CHECK(pyr[2].height == 60);
}

TEST_CASE("gaussian_pyramid identity and constants") {
    FarnebackParams p;
    p.levels = 1;
    const PlaneF img = textured_plane(64, 48, 3);
    const auto pyr = gaussian_pyramid(img, p);
    REQUIRE(pyr.size() == 1);
    CHECK(std::memcmp(pyr[0].v.data(), img.v.data(), img.size() * sizeof(float)) == 0);

    p.levels = 4;
    const auto flat = gaussian_pyramid(PlaneF(120, 100, 7.f), p);
    for (const auto& level : flat)
        for (float v : level.v) CHECK(v == doctest::Approx(7.f).epsilon(1e-6));
}

TEST_CASE("gaussian_pyramid truncates tiny levels, never empty") {
    FarnebackParams p;
    p.levels = 6;
    const auto pyr = gaussian_pyramid(PlaneF(20, 20, 1.f), p);
    CHECK(pyr.size() >= 1);
    CHECK(pyr.size() < 6);
    for (const auto& level : pyr) {
        CHECK(level.width >= 4);
        CHECK(level.height >= 4);
    }
}

TEST_CASE("poly_expansion constant plane") {
    const auto e = poly_expansion(PlaneF(40, 30, 7.f), 5, 1.2f);
    for (int y = 0; y < 30; ++y)
        for (int x = 0; x < 40; ++x) {
            CHECK(e.c.at(x, y) == doctest::Approx(7.0).epsilon(1e-5));
            CHECK(e.a11.at(x, y) == doctest::Approx(0.0).epsilon(1e-5));
            CHECK(e.a12.at(x, y) == doctest::Approx(0.0).epsilon(1e-5));
            CHECK(e.a22.at(x, y) == doctest::Approx(0.0).epsilon(1e-5));
            CHECK(e.b1.at(x, y) == doctest::Approx(0.0).epsilon(1e-5));
            CHECK(e.b2.at(x, y) == doctest::Approx(0.0).epsilon(1e-5));
        }
}

TEST_CASE("poly_expansion linear ramp and quadratic") {
    PlaneF ramp(41, 31);
    for (int y = 0; y < 31; ++y)
        for (int x = 0; x < 41; ++x) ramp.at(x, y) = 3.f * x;
    const auto er = poly_expansion(ramp, 5, 1.2f);
    for (int y = 4; y < 27; ++y)
        for (int x = 4; x < 37; ++x) {
            CHECK(er.b1.at(x, y) == doctest::Approx(3.0).epsilon(1e-4));
            CHECK(er.b2.at(x, y) == doctest::Approx(0.0).epsilon(1e-4));
            CHECK(er.a11.at(x, y) == doctest::Approx(0.0).epsilon(1e-4));
        }

    PlaneF quad(41, 31);
    for (int y = 0; y < 31; ++y)
        for (int x = 0; x < 41; ++x) quad.at(x, y) = static_cast<float>(x) * x;
    const auto eq = poly_expansion(quad, 5, 1.2f);
    for (int y = 4; y < 27; ++y)
        for (int x = 4; x < 37; ++x) {
            CHECK(eq.a11.at(x, y) == doctest::Approx(1.0).epsilon(1e-3));
            CHECK(eq.a12.at(x, y) == doctest::Approx(0.0).epsilon(1e-3));
            CHECK(eq.b1.at(x, y) == doctest::Approx(2.0 * x).epsilon(1e-3));
        }
}

TEST_CASE("poly_expansion agrees with the direct least-squares fit") {
    const PlaneF img = textured_plane(64, 48, 11);
    const auto e = poly_expansion(img, 5, 1.2f);
    Rng rng(5);
    for (int trial = 0; trial < 200; ++trial) {
        const int x = 3 + rng.uniform_u32(64 - 6);
        const int y = 3 + rng.uniform_u32(48 - 6);
        const auto fit = ref::poly_fit_at(img, x, y, 5, 1.2);
        CHECK(e.a11.at(x, y) == doctest::Approx(fit.a11).epsilon(1e-3).scale(1.0));
        CHECK(e.a12.at(x, y) == doctest::Approx(fit.a12).epsilon(1e-3).scale(1.0));
        CHECK(e.a22.at(x, y) == doctest::Approx(fit.a22).epsilon(1e-3).scale(1.0));
        CHECK(e.b1.at(x, y) == doctest::Approx(fit.b1).epsilon(1e-3).scale(1.0));
        CHECK(e.b2.at(x, y) == doctest::Approx(fit.b2).epsilon(1e-3).scale(1.0));
        CHECK(e.c.at(x, y) == doctest::Approx(fit.c).epsilon(1e-3).scale(1.0));
    }
}

TEST_CASE("poly_expansion is linear in the image") {
    const PlaneF i1 = textured_plane(48, 40, 21);
    const PlaneF i2 = textured_plane(48, 40, 22);
    const float alpha = 0.7f, beta = -1.3f;
    PlaneF mix(48, 40);
    for (size_t i = 0; i < mix.size(); ++i) mix.v[i] = alpha * i1.v[i] + beta * i2.v[i];
    const auto e1 = poly_expansion(i1, 5, 1.2f);
    const auto e2 = poly_expansion(i2, 5, 1.2f);
    const auto em = poly_expansion(mix, 5, 1.2f);
    // the fit is linear in pixel values, so deviations are measured against
    // the pixel magnitude (and, more loosely, against each plane's own range
    // since small coefficients sit below fp32 cancellation noise)
    double input_scale = 0;
    for (float v : mix.v) input_scale = std::max(input_scale, std::abs((double)v));
    auto check_plane = [&](const PlaneF& a, const PlaneF& b, const PlaneF& m) {
        double plane_scale = 1e-3;
        for (size_t i = 0; i < m.size(); ++i)
            plane_scale = std::max(plane_scale,
                                   std::abs(alpha * static_cast<double>(a.v[i]) + beta * b.v[i]));
        for (size_t i = 0; i < m.size(); ++i) {
            const double expect = alpha * static_cast<double>(a.v[i]) + beta * b.v[i];
            const double diff = std::abs(m.v[i] - expect);
            CHECK(diff < 1e-6 * input_scale);
            CHECK(diff < 1e-5 * plane_scale);
        }
    };
    check_plane(e1.a11, e2.a11, em.a11);
    check_plane(e1.a12, e2.a12, em.a12);
    check_plane(e1.b1, e2.b1, em.b1);
    check_plane(e1.b2, e2.b2, em.b2);
    check_plane(e1.c, e2.c, em.c);
}

TEST_CASE("displacement_update: identical expansions, zero prior -> zero flow") {
    const PlaneF img = textured_plane(64, 48, 31);
    const auto e = poly_expansion(img, 5, 1.2f);
    const auto out = displacement_update(e, e, FlowField(64, 48), 15);
    for (size_t i = 0; i < out.u.size(); ++i) {
        CHECK(out.u.v[i] == 0.f);
        CHECK(out.v.v[i] == 0.f);
    }
}

TEST_CASE("displacement_update: integer translation and fixed point") {
    // next = prev shifted by (2, 0): sample both from one master
    const PlaneF master = textured_plane(96, 64, 41);
    PlaneF prev(80, 48), next(80, 48);
    for (int y = 0; y < 48; ++y)
        for (int x = 0; x < 80; ++x) {
            prev.at(x, y) = master.at(x + 8, y + 8);
            next.at(x, y) = master.at(x + 6, y + 8);  // content moved +2 in x
        }
    const auto ep = poly_expansion(prev, 5, 1.2f);
    const auto en = poly_expansion(next, 5, 1.2f);

    // single update from zero prior: interior within 0.25 px
    const auto one = displacement_update(ep, en, FlowField(80, 48), 15);
    for (int y = 12; y < 36; ++y)
        for (int x = 12; x < 68; ++x) {
            CHECK(std::abs(one.u.at(x, y) - 2.f) < 0.25f);
            CHECK(std::abs(one.v.at(x, y)) < 0.25f);
        }

    // prior equal to the truth stays put within 0.05 px
    const auto fixed = displacement_update(ep, en, constant_field(80, 48, 2.f, 0.f), 15);
    for (int y = 12; y < 36; ++y)
        for (int x = 12; x < 68; ++x) {
            CHECK(std::abs(fixed.u.at(x, y) - 2.f) < 0.05f);
            CHECK(std::abs(fixed.v.at(x, y)) < 0.05f);
        }
}

TEST_CASE("estimate_flow: zero motion") {
    FarnebackParams p;
    const PlaneF img = textured_plane(160, 120, 51);
    const auto f = estimate_flow(img, img, p);
    for (size_t i = 0; i < f.u.size(); ++i) {
        CHECK(std::abs(f.u.v[i]) < 1e-3f);
        CHECK(std::abs(f.v.v[i]) < 1e-3f);
    }
}

TEST_CASE("estimate_flow: global shift (3,-2) within 0.5 px") {
    FarnebackParams p;
    auto [a, b] = synth::gen_translation_pair(320, 240, 3.f, -2.f, 61);
    const auto f = estimate_flow(a, b, p);
    const double epe =
        ref::endpoint_error(f, constant_field(320, 240, 3.f, -2.f), 10);
    CHECK(epe < 0.5);
}

TEST_CASE("estimate_flow: multi-scale beats single level on large motion") {
    auto [a, b] = synth::gen_translation_pair(320, 240, 8.f, 0.f, 71);
    FarnebackParams single;
    single.levels = 1;
    FarnebackParams multi;
    multi.levels = 3;
    const FlowField truth = constant_field(320, 240, 8.f, 0.f);
    const double err1 = ref::endpoint_error(estimate_flow(a, b, single), truth, 10);
    const double err3 = ref::endpoint_error(estimate_flow(a, b, multi), truth, 10);
    CHECK(err3 < err1);
    CHECK(err3 < 0.5);
}

TEST_CASE("estimate_flow: shift equivariance for small integer shifts") {
    FarnebackParams p;
    Rng rng(81);
    for (int trial = 0; trial < 4; ++trial) {
        const int sx = static_cast<int>(rng.uniform_u32(11)) - 5;
        const int sy = static_cast<int>(rng.uniform_u32(11)) - 5;
        auto [a, b] = synth::gen_translation_pair(
            160, 120, static_cast<float>(sx), static_cast<float>(sy), 900 + trial);
        const double epe = ref::endpoint_error(
            estimate_flow(a, b, p),
            constant_field(160, 120, static_cast<float>(sx), static_cast<float>(sy)), 10);
        CHECK(epe < 0.5);
    }
}

TEST_CASE("estimate_flow: finite output on hostile inputs") {
    FarnebackParams p;
    Rng rng(91);
    PlaneF noise(64, 64), steps(64, 64);
    for (size_t i = 0; i < noise.size(); ++i) noise.v[i] = static_cast<float>(rng.uniform() * 255);
    for (int y = 0; y < 64; ++y)
        for (int x = 0; x < 64; ++x) steps.at(x, y) = (x / 8 + y / 8) % 2 ? 255.f : 0.f;
    for (const auto* pair : {&noise, &steps}) {
        const auto f = estimate_flow(*pair, PlaneF(64, 64, 0.f), p);
        for (size_t i = 0; i < f.u.size(); ++i) {
            CHECK(std::isfinite(f.u.v[i]));
            CHECK(std::isfinite(f.v.v[i]));
        }
    }
    // constant vs constant: singular systems everywhere, still finite zeros
    const auto flat = estimate_flow(PlaneF(64, 64, 5.f), PlaneF(64, 64, 5.f), p);
    for (size_t i = 0; i < flat.u.size(); ++i) CHECK(flat.u.v[i] == 0.f);
}

TEST_CASE("estimate_flow: deterministic, thread-count independent") {
    FarnebackParams p;
    auto [a, b] = synth::gen_translation_pair(160, 120, 2.f, 1.f, 101);
    set_threads(1);
    const auto f1 = estimate_flow(a, b, p);
    const auto f2 = estimate_flow(a, b, p);
    set_threads(2);
    const auto f4 = estimate_flow(a, b, p);
    set_threads(1);
    CHECK(std::memcmp(f1.u.v.data(), f2.u.v.data(), f1.u.size() * sizeof(float)) == 0);
    CHECK(std::memcmp(f1.v.v.data(), f2.v.v.data(), f1.v.size() * sizeof(float)) == 0);
    CHECK(std::memcmp(f1.u.v.data(), f4.u.v.data(), f1.u.size() * sizeof(float)) == 0);
    CHECK(std::memcmp(f1.v.v.data(), f4.v.v.data(), f1.v.size() * sizeof(float)) == 0);
}

TEST_CASE("estimate_flow: dimension mismatch") {
    FarnebackParams p;
    CHECK_THROWS_AS(estimate_flow(PlaneF(64, 64, 0.f), PlaneF(32, 64, 0.f), p), Error);
}

TEST_CASE("raw flow file round-trip") {
    testutil::TempDir tmp("flowio");
    FlowField f(33, 17);
    Rng rng(7);
    for (size_t i = 0; i < f.u.size(); ++i) {
        f.u.v[i] = static_cast<float>(rng.normal());
        f.v.v[i] = static_cast<float>(rng.normal());
    }
    const std::string path = tmp.file("f.bin");
    write_flow_raw(f, path);
    const auto back = read_flow_raw(path);
    CHECK(back.width() == 33);
    CHECK(back.height() == 17);
    CHECK(std::memcmp(back.u.v.data(), f.u.v.data(), f.u.size() * sizeof(float)) == 0);
    CHECK(std::memcmp(back.v.v.data(), f.v.v.data(), f.v.size() * sizeof(float)) == 0);
    CHECK_THROWS_AS(read_flow_raw(tmp.file("missing.bin")), Error);
}

TEST_CASE("estimate_flow: single-thread runtime under 100 ms at 320x240") {
    FarnebackParams p;
    auto [a, b] = synth::gen_translation_pair(320, 240, 3.f, 1.f, 111);
    const PlaneF pa = to_gray(a), pb = to_gray(b);
    set_threads(1);
    estimate_flow(pa, pb, p);  // warm-up
    const auto t0 = std::chrono::steady_clock::now();
    const int reps = 5;
    for (int i = 0; i < reps; ++i) estimate_flow(pa, pb, p);
    const double ms = std::chrono::duration<double, std::milli>(
                          std::chrono::steady_clock::now() - t0)
                          .count() /
                      reps;
    MESSAGE("estimate_flow 320x240: " << ms << " ms/pair single thread");
    CHECK(ms < 100.0);
}
