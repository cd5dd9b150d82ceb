#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace flowgest {

// Seeded generator used wherever the pipeline draws randomness. Hand-rolled
// distributions so that sequences depend only on the seed, not on the
// standard library implementation.
class Rng {
public:
    // splitmix64 pre-mixing: raw adjacent seeds would leave mt19937 streams
    // visibly correlated
    explicit Rng(uint64_t seed) : gen_(mix(mix(seed))) {}

    static uint64_t mix(uint64_t x) {
        x += 0x9e3779b97f4a7c15ULL;
        x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
        x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
        return x ^ (x >> 31);
    }

    uint64_t next_u64() { return gen_(); }

    // uniform in [0, n), n > 0
    uint32_t uniform_u32(uint32_t n) {
        return static_cast<uint32_t>((static_cast<__uint128_t>(next_u64()) * n) >> 64);
    }

    // uniform in [0, 1)
    double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    bool coin() { return (next_u64() >> 63) != 0; }

    double normal(double mean = 0.0, double stddev = 1.0) {
        if (have_spare_) {
            have_spare_ = false;
            return mean + stddev * spare_;
        }
        double u1 = 0.0;
        while (u1 <= 1e-300) u1 = uniform();
        double u2 = uniform();
        double r = std::sqrt(-2.0 * std::log(u1));
        double a = 2.0 * 3.14159265358979323846 * u2;
        spare_ = r * std::sin(a);
        have_spare_ = true;
        return mean + stddev * r * std::cos(a);
    }

    // derive an independent stream, e.g. one per clip
    Rng fork(uint64_t salt) {
        uint64_t s = next_u64();
        return Rng(s ^ (salt * 0x9e3779b97f4a7c15ULL));
    }

private:
    std::mt19937_64 gen_;
    double spare_ = 0.0;
    bool have_spare_ = false;
};

}  // namespace flowgest
