#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace b2w {

// Deterministic RNG with hand-rolled distributions. mt19937_64 output is
// pinned by the standard and the distributions below are written out
// explicitly, so seeded results are identical across platforms and
// standard libraries. Golden tests rely on this.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed), seed_mix_(seed) {}

    std::uint64_t next_u64() { return engine_(); }

    // Uniform double in [0, 1), 53-bit resolution.
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    // Uniform integer in [0, n). Rejection sampling keeps it unbiased.
    std::uint64_t uniform_int(std::uint64_t n) {
        const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
        std::uint64_t r = engine_();
        while (r >= limit) {
            r = engine_();
        }
        return r % n;
    }

    bool bernoulli(double p) { return uniform() < p; }

    // Box-Muller with a cached spare.
    double normal(double mean = 0.0, double stddev = 1.0) {
        if (has_spare_) {
            has_spare_ = false;
            return mean + spare_ * stddev;
        }
        double u1 = uniform();
        while (u1 <= 0.0) {
            u1 = uniform();
        }
        const double u2 = uniform();
        const double radius = std::sqrt(-2.0 * std::log(u1));
        const double angle = 6.283185307179586 * u2;
        spare_ = radius * std::sin(angle);
        has_spare_ = true;
        return mean + radius * std::cos(angle) * stddev;
    }

    // Independent stream for item `index` (e.g. one per corpus line).
    Rng derive(std::uint64_t index) const {
        std::uint64_t x = seed_mix_ ^ (0x9E3779B97F4A7C15ULL * (index + 1));
        x ^= x >> 30;
        x *= 0xBF58476D1CE4E5B9ULL;
        x ^= x >> 27;
        x *= 0x94D049BB133111EBULL;
        x ^= x >> 31;
        return Rng(x);
    }

    void reseed(std::uint64_t seed) {
        engine_.seed(seed);
        seed_mix_ = seed;
        has_spare_ = false;
    }

private:
    std::mt19937_64 engine_;
    std::uint64_t seed_mix_ = 0;
    bool has_spare_ = false;
    double spare_ = 0.0;
};

}  // namespace b2w
