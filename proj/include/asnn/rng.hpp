#pragma once

#include <cmath>
#include <cstdint>
#include <utility>
#include <vector>

// Deterministic random number generation for the whole project.
//
// All randomness flows through xoshiro256++ seeded via splitmix64
// (public-domain algorithms by Blackman & Vigna). The standard library
// engines are avoided on purpose: std::normal_distribution and friends
// are not bit-identical across implementations, and every result in
// this project must reproduce exactly from a seed.

namespace asnn {

struct SplitMix64 {
    std::uint64_t state;

    explicit SplitMix64(std::uint64_t seed) : state(seed) {}

    std::uint64_t next() {
        std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }
};

// Mixes a base seed with one or two stream identifiers into a fresh
// seed. Used everywhere a derived, uncorrelated stream is needed
// (per-trial seeds, per-epoch shuffles, per-layer dropout, ...).
inline std::uint64_t mix_seed(std::uint64_t base, std::uint64_t a) {
    SplitMix64 sm(base);
    sm.state ^= sm.next() + a;
    return sm.next();
}

inline std::uint64_t mix_seed(std::uint64_t base, std::uint64_t a, std::uint64_t b) {
    return mix_seed(mix_seed(base, a), b);
}

class Xoshiro256pp {
public:
    explicit Xoshiro256pp(std::uint64_t seed) {
        SplitMix64 sm(seed);
        for (auto& word : state_) word = sm.next();
        has_cached_normal_ = false;
        cached_normal_ = 0.0;
    }

    std::uint64_t next() {
        const std::uint64_t result = rotl(state_[0] + state_[3], 23) + state_[0];
        const std::uint64_t t = state_[1] << 17;
        state_[2] ^= state_[0];
        state_[3] ^= state_[1];
        state_[1] ^= state_[2];
        state_[0] ^= state_[3];
        state_[2] ^= t;
        state_[3] = rotl(state_[3], 45);
        return result;
    }

    // Uniform double in [0, 1), 53-bit resolution.
    double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

    // Uniform double in (a, b] guaranteed nonzero offset; used where a
    // log() of the value must stay finite.
    double uniform_positive() {
        return (static_cast<double>(next() >> 11) + 1.0) * 0x1.0p-53;
    }

    // Unbiased integer in [0, n) via rejection sampling.
    std::uint64_t uniform_below(std::uint64_t n) {
        const std::uint64_t threshold = (0 - n) % n;
        for (;;) {
            const std::uint64_t r = next();
            if (r >= threshold) return r % n;
        }
    }

    // Standard normal via Box-Muller. One value is cached, so draws come
    // in a fixed deterministic sequence.
    double normal() {
        if (has_cached_normal_) {
            has_cached_normal_ = false;
            return cached_normal_;
        }
        const double u1 = uniform_positive();
        const double u2 = uniform();
        const double radius = std::sqrt(-2.0 * std::log(u1));
        const double angle = 2.0 * kPi * u2;
        cached_normal_ = radius * std::sin(angle);
        has_cached_normal_ = true;
        return radius * std::cos(angle);
    }

private:
    static constexpr double kPi = 3.14159265358979323846;

    static std::uint64_t rotl(std::uint64_t x, int k) {
        return (x << k) | (x >> (64 - k));
    }

    std::uint64_t state_[4];
    bool has_cached_normal_;
    double cached_normal_;
};

// Seeded Fisher-Yates shuffle.
template <typename T>
void shuffle_in_place(std::vector<T>& values, Xoshiro256pp& rng) {
    if (values.size() < 2) return;
    for (std::size_t i = values.size() - 1; i > 0; --i) {
        const std::size_t j = static_cast<std::size_t>(rng.uniform_below(i + 1));
        if (i != j) std::swap(values[i], values[j]);
    }
}

}  // namespace asnn
