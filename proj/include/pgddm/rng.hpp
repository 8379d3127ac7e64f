#pragma once

#include <cstdint>
#include <initializer_list>
#include <span>

namespace pgddm {

// splitmix64 finalizer (Vigna). Used both as a hash and as the seeding PRNG
// for xoshiro state expansion.
inline uint64_t splitmix64(uint64_t& state) {
    uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

// Deterministic counter-based stream generator: xoshiro256++ seeded from a
// hash of (seed, purpose, indices...). Two streams with different index
// tuples are statistically independent, so Monte Carlo loops can hand one
// stream to each (iteration, particle, step) cell and get results that do
// not depend on thread scheduling.
class RngStream {
  public:
    explicit RngStream(uint64_t seed) {
        uint64_t sm = seed;
        for (auto& w : s_) w = splitmix64(sm);
    }

    uint64_t next_u64() {
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

    // Uniform double in [0, 1) with 53 random bits. Bit-reproducible across
    // platforms, unlike std::uniform_real_distribution.
    double next_double() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    // Uniform integer in [0, n). Rejection-free multiply-shift would bias at
    // huge n; plain rejection keeps it exact.
    uint64_t next_below(uint64_t n) {
        const uint64_t threshold = -n % n;  // 2^64 mod n
        for (;;) {
            const uint64_t r = next_u64();
            if (r >= threshold) return r % n;
        }
    }

    bool next_bernoulli(double p) { return next_double() < p; }

    // Draws an index from an unnormalized non-negative weight vector by CDF
    // scan. The caller guarantees total > 0.
    int next_categorical(std::span<const double> weights) {
        double total = 0.0;
        for (double w : weights) total += w;
        double u = next_double() * total;
        double acc = 0.0;
        for (size_t i = 0; i < weights.size(); ++i) {
            acc += weights[i];
            if (u < acc) return static_cast<int>(i);
        }
        return static_cast<int>(weights.size()) - 1;  // u landed on rounding slop
    }

  private:
    static uint64_t rotl(uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }
    uint64_t s_[4];
};

// Purposes salt the stream hash so e.g. propagation and reward estimation at
// the same (iteration, particle, step) never share randomness.
enum class StreamPurpose : uint64_t {
    forward_noise = 0x01,
    propagate = 0x02,
    estimate = 0x03,
    resample = 0x04,
    ancestor = 0x05,
    select = 0x06,
    rollout = 0x07,
    oracle_draw = 0x08,
};

inline uint64_t mix_stream_key(uint64_t seed, std::initializer_list<uint64_t> parts) {
    uint64_t h = seed ^ 0x6a09e667f3bcc909ULL;
    for (uint64_t v : parts) {
        uint64_t sm = h ^ (v * 0x9e3779b97f4a7c15ULL + 0x2545f4914f6cdd1dULL);
        h = splitmix64(sm);
    }
    return h;
}

inline RngStream derive_stream(uint64_t seed, StreamPurpose purpose, uint64_t a = 0,
                               uint64_t b = 0, uint64_t c = 0) {
    return RngStream(mix_stream_key(seed, {static_cast<uint64_t>(purpose), a, b, c}));
}

}  // namespace pgddm
