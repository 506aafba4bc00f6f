#pragma once

#include <cstdint>

namespace mova {

// SplitMix64, used for seeding and for deriving per-run seeds.
class Splitmix64 {
public:
    explicit Splitmix64(uint64_t seed) : state_(seed) {}

    uint64_t next() {
        uint64_t z = (state_ += 0x9E3779B97F4A7C15ULL);
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }

private:
    uint64_t state_;
};

// xoshiro256++ by Blackman and Vigna. State is seeded through SplitMix64 so
// that any 64-bit seed, including zero, yields a well-mixed state.
class Rng {
public:
    using result_type = uint64_t;

    explicit Rng(uint64_t seed = 0) { reseed(seed); }

    void reseed(uint64_t seed) {
        Splitmix64 sm(seed);
        for (auto& w : s_) w = sm.next();
    }

    static constexpr result_type min() { return 0; }
    static constexpr result_type max() { return ~result_type(0); }

    uint64_t next() {
        const uint64_t result = rotl(s_[0] + s_[3], 23) + s_[0];
        const uint64_t t = s_[1] << 17;
        s_[2] ^= s_[0];
        s_[3] ^= s_[1];
        s_[1] ^= s_[2];
        s_[0] ^= s_[3];
        s_[2] ^= t;
        s_[3] = rotl(s_[3], 45);
        return result;
    }

    result_type operator()() { return next(); }

    // Uniform double in [0, 1) using the top 53 bits.
    double uniform01() { return (next() >> 11) * 0x1.0p-53; }

    // Unbiased integer in [0, bound) via Lemire's multiply-shift rejection.
    // Avoids std::uniform_int_distribution, whose output differs across
    // standard library implementations.
    uint64_t bounded(uint64_t bound) {
        __uint128_t m = static_cast<__uint128_t>(next()) * bound;
        auto lo = static_cast<uint64_t>(m);
        if (lo < bound) {
            uint64_t threshold = (0 - bound) % bound;
            while (lo < threshold) {
                m = static_cast<__uint128_t>(next()) * bound;
                lo = static_cast<uint64_t>(m);
            }
        }
        return static_cast<uint64_t>(m >> 64);
    }

private:
    static uint64_t rotl(uint64_t x, int k) {
        return (x << k) | (x >> (64 - k));
    }

    uint64_t s_[4];
};

// Seed for run `run_index` of a sweep: a SplitMix64 stream seeded at
// `base_seed` and advanced `run_index` steps. Runs get decorrelated seeds
// while remaining reproducible from the single base seed.
inline uint64_t derive_run_seed(uint64_t base_seed, uint64_t run_index) {
    Splitmix64 sm(base_seed + run_index * 0x9E3779B97F4A7C15ULL);
    return sm.next();
}

} // namespace mova
