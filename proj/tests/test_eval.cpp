#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <set>

#include "flowgest/error.hpp"
#include "flowgest/eval.hpp"
#include "flowgest/ref/reference.hpp"
#include "flowgest/rng.hpp"

using namespace flowgest;
using namespace flowgest::eval;

namespace {

std::vector<ingest::ManifestRow> full_manifest(int subjects, int trials, int clips_per_trial = 2) {
    std::vector<ingest::ManifestRow> rows;
    for (int s = 0; s < subjects; ++s)
        for (int t = 1; t <= trials; ++t)
            for (int c = 0; c < clips_per_trial; ++c) {
                ingest::ManifestRow r;
                r.task = "Suturing";
                r.subject = std::string(1, static_cast<char>('A' + s));
                r.trial = t;
                r.start = 1 + 100 * c;
                r.end = r.start + 30;
                r.label = 1 + (s + t + c) % 15;
                r.rate = 30;
                r.frames = 31;
                rows.push_back(r);
            }
    return rows;
}

void check_fold_invariants(const std::vector<ingest::ManifestRow>& manifest,
                           const std::vector<FoldSpec>& folds) {
    for (const auto& fold : folds) {
        std::set<int> train(fold.train.begin(), fold.train.end());
        std::set<int> val(fold.validation.begin(), fold.validation.end());
        std::set<int> test(fold.test.begin(), fold.test.end());
        // pairwise disjoint
        for (int i : val) CHECK(!train.count(i));
        for (int i : test) {
            CHECK(!train.count(i));
            CHECK(!val.count(i));
        }
        // test = exactly the clips of supertrial i; every kept clip lands somewhere
        for (size_t i = 0; i < manifest.size(); ++i) {
            if (manifest[i].status != ingest::ClipStatus::Kept) {
                CHECK(!train.count(static_cast<int>(i)));
                CHECK(!val.count(static_cast<int>(i)));
                CHECK(!test.count(static_cast<int>(i)));
                continue;
            }
            const bool in_test = manifest[i].trial == fold.fold_index;
            CHECK(test.count(static_cast<int>(i)) == (in_test ? 1u : 0u));
            CHECK((train.count(static_cast<int>(i)) + val.count(static_cast<int>(i)) +
                   test.count(static_cast<int>(i))) == 1u);
        }
        // validation is one whole trial, never the test trial
        CHECK(fold.validation_trial != fold.fold_index);
        for (int i : val) CHECK(manifest[i].trial == fold.validation_trial);
    }
}

}  // namespace

TEST_CASE("build_loso_folds on the full 8x5 grid") {
    const auto manifest = full_manifest(8, 5);
    const auto folds = build_loso_folds(manifest, 7);
    REQUIRE(folds.size() == 5);
    // fold 3 tests on exactly the 8 subjects' trial-3 clips
    const auto& f3 = folds[2];
    CHECK(f3.fold_index == 3);
    CHECK(f3.test.size() == 8 * 2);
    for (int i : f3.test) CHECK(manifest[i].trial == 3);
    check_fold_invariants(manifest, folds);
}

TEST_CASE("build_loso_folds determinism and validation choice") {
    const auto manifest = full_manifest(8, 5);
    const auto a = build_loso_folds(manifest, 123);
    const auto b = build_loso_folds(manifest, 123);
    for (size_t i = 0; i < a.size(); ++i) {
        CHECK(a[i].validation_trial == b[i].validation_trial);
        CHECK(a[i].train == b[i].train);
        CHECK(a[i].validation == b[i].validation);
        CHECK(a[i].test == b[i].test);
    }
}

TEST_CASE("build_loso_folds randomized manifests with missing trials") {
    Rng rng(99);
    for (int iter = 0; iter < 200; ++iter) {
        std::vector<ingest::ManifestRow> manifest;
        const int subjects = 2 + rng.uniform_u32(8);
        for (int s = 0; s < subjects; ++s) {
            for (int t = 1; t <= 5; ++t) {
                if (rng.uniform() < 0.25) continue;  // subject misses this trial
                const int clips = 1 + rng.uniform_u32(3);
                for (int c = 0; c < clips; ++c) {
                    ingest::ManifestRow r;
                    r.task = "KnotTying";
                    r.subject = std::string(1, static_cast<char>('A' + s));
                    r.trial = t;
                    r.start = 1 + 50 * c;
                    r.end = r.start + 20;
                    r.label = 1 + rng.uniform_u32(15);
                    r.rate = 30;
                    r.frames = 21;
                    r.status = rng.uniform() < 0.1 ? ingest::ClipStatus::Excluded
                                                   : ingest::ClipStatus::Kept;
                    manifest.push_back(r);
                }
            }
        }
        std::set<int> trials;
        for (const auto& r : manifest)
            if (r.status == ingest::ClipStatus::Kept) trials.insert(r.trial);
        if (trials.size() < 2) {
            CHECK_THROWS_AS(build_loso_folds(manifest, iter), Error);
            continue;
        }
        const auto folds = build_loso_folds(manifest, iter);
        CHECK(folds.size() == trials.size());
        check_fold_invariants(manifest, folds);
    }
}

TEST_CASE("build_loso_folds rejects single-trial manifests") {
    const auto manifest = full_manifest(4, 1);
    CHECK_THROWS_AS(build_loso_folds(manifest, 1), Error);
    CHECK_THROWS_AS(build_loso_folds({}, 1), Error);
}

TEST_CASE("vote examples") {
    // twenty identical one-hot votes
    std::vector<std::vector<float>> onehot(20, std::vector<float>(15, 0.f));
    for (auto& v : onehot) v[7] = 1.f;
    CHECK(vote(onehot) == 7);

    // 10 chunks peaked 0.6 on class 2 vs 10 peaked 0.9 on class 5
    std::vector<std::vector<float>> mixed;
    for (int i = 0; i < 10; ++i) {
        std::vector<float> p(15, 0.4f / 14);
        p[2] = 0.6f;
        mixed.push_back(p);
    }
    for (int i = 0; i < 10; ++i) {
        std::vector<float> p(15, 0.1f / 14);
        p[5] = 0.9f;
        mixed.push_back(p);
    }
    CHECK(vote(mixed) == 5);

    // exact tie goes to the lower class id
    std::vector<std::vector<float>> tie(2, std::vector<float>(4, 0.f));
    tie[0][1] = 1.f;
    tie[1][3] = 1.f;
    CHECK(vote(tie) == 1);

    std::vector<std::vector<float>> bad{{0.5f, 0.5f}, {0.3f, 0.3f, 0.4f}};
    CHECK_THROWS_AS(vote(bad), Error);
    CHECK_THROWS_AS(vote({}), Error);
}

TEST_CASE("vote is order-invariant and matches the brute-force oracle") {
    Rng rng(31);
    for (int iter = 0; iter < 500; ++iter) {
        const int chunks = 1 + rng.uniform_u32(20);
        const int classes = 2 + rng.uniform_u32(15);
        std::vector<std::vector<float>> probs(chunks, std::vector<float>(classes));
        for (auto& p : probs) {
            float sum = 0;
            for (auto& v : p) {
                v = static_cast<float>(rng.uniform());
                sum += v;
            }
            for (auto& v : p) v /= sum;
        }
        // occasional exact ties
        if (iter % 7 == 0)
            for (auto& p : probs) std::fill(p.begin(), p.end(), 1.f / classes);

        const int mine = vote(probs);
        CHECK(mine == ref::vote_bruteforce(probs));

        std::vector<std::vector<float>> shuffled = probs;
        for (size_t i = shuffled.size(); i > 1; --i)
            std::swap(shuffled[i - 1], shuffled[rng.uniform_u32(static_cast<uint32_t>(i))]);
        CHECK(vote(shuffled) == mine);
    }
}

TEST_CASE("aggregate mean and population std") {
    const auto flat = aggregate("Suturing", {90, 90, 90, 90, 90});
    CHECK(flat.mean == doctest::Approx(90.0));
    CHECK(flat.stddev == doctest::Approx(0.0));

    const auto spread = aggregate("Suturing", {88, 90, 92, 91, 89});
    CHECK(spread.mean == doctest::Approx(90.0));
    CHECK(spread.stddev == doctest::Approx(std::sqrt(2.0)).epsilon(1e-12));

    // against the two-pass reference on random sets
    Rng rng(41);
    for (int iter = 0; iter < 100; ++iter) {
        std::vector<double> xs(5);
        for (auto& x : xs) x = rng.uniform() * 100;
        const auto rep = aggregate("KnotTying", xs);
        double m, s;
        ref::mean_std_twopass(xs, m, s);
        CHECK(std::abs(rep.mean - m) < 1e-12);
        CHECK(std::abs(rep.stddev - s) < 1e-12);
    }
    CHECK_THROWS_AS(aggregate("Suturing", {}), Error);
}

TEST_CASE("emit_report_text reproduces the published row") {
    const std::string table = emit_report_text(published_baseline());
    CHECK(table.find("91.07 \xC2\xB1 0.67") != std::string::npos);
    CHECK(table.find("74.25 \xC2\xB1 3.66") != std::string::npos);
    CHECK(table.find("87.78 \xC2\xB1 3.44") != std::string::npos);
    CHECK(table.find("Suturing") != std::string::npos);
    CHECK(table.find("Needle Passing") != std::string::npos);
    CHECK(table.find("Knot Tying") != std::string::npos);
}

TEST_CASE("emit_report_text marks absent tasks") {
    TaskReport r = aggregate("Suturing", {90, 91, 92, 93, 94}, "mymethod");
    const std::string table = emit_report_text({r});
    CHECK(table.find("mymethod") != std::string::npos);
    CHECK(table.find("92.00 \xC2\xB1 1.41") != std::string::npos);
    CHECK(table.find("\xE2\x80\x94") != std::string::npos);  // em dash placeholders
}

TEST_CASE("report CSV round-trips numeric values exactly") {
    std::vector<TaskReport> reports;
    reports.push_back(aggregate("Suturing", {88.25, 90.5, 92.125, 91.0, 89.75}, "m1"));
    reports.push_back(aggregate("Synthetic", {99.0, 100.0, 98.4375, 100.0, 97.5}, "m2"));
    const std::string csv = emit_report_csv(reports);
    const auto back = parse_report_csv(csv);
    REQUIRE(back.size() == reports.size());
    for (size_t i = 0; i < reports.size(); ++i) {
        CHECK(back[i].method == reports[i].method);
        CHECK(back[i].task == reports[i].task);
        CHECK(back[i].mean == reports[i].mean);
        CHECK(back[i].stddev == reports[i].stddev);
        CHECK(back[i].fold_acc == reports[i].fold_acc);
    }
    CHECK_THROWS_AS(parse_report_csv("garbage"), Error);
}
