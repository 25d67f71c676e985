#pragma once

#include <cstdint>
#include <span>
#include <string_view>
#include <utility>
#include <vector>

namespace fdrkit {

// Deterministic cross-platform PRNG. std::mt19937 plus the standard
// distributions are not guaranteed to produce identical streams across
// library implementations, so all randomized behaviour in this project
// goes through this generator.

struct SplitMix64 {
    uint64_t state;

    explicit SplitMix64(uint64_t seed) : state(seed) {}

    uint64_t next() {
        uint64_t z = (state += 0x9e3779b97f4a7c15ull);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
        return z ^ (z >> 31);
    }
};

/// xoshiro256** seeded through SplitMix64.
class Rng {
public:
    explicit Rng(uint64_t seed) {
        SplitMix64 sm(seed);
        for (auto& w : s_) w = sm.next();
    }

    uint64_t next_u64() {
        uint64_t result = rotl(s_[1] * 5, 7) * 9;
        uint64_t t = s_[1] << 17;
        s_[2] ^= s_[0];
        s_[3] ^= s_[1];
        s_[1] ^= s_[2];
        s_[0] ^= s_[3];
        s_[2] ^= t;
        s_[3] = rotl(s_[3], 45);
        return result;
    }

    /// Uniform double in [0, 1).
    double next_double() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    /// Uniform integer in [0, n). n must be > 0. Unbiased (rejection).
    uint64_t next_below(uint64_t n) {
        uint64_t threshold = (0 - n) % n;
        for (;;) {
            uint64_t r = next_u64();
            if (r >= threshold) return r % n;
        }
    }

    double next_range(double lo, double hi) { return lo + (hi - lo) * next_double(); }

    bool next_bool() { return (next_u64() >> 63) != 0; }

private:
    static uint64_t rotl(uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }
    uint64_t s_[4];
};

inline uint64_t mix_seed(uint64_t a, uint64_t b) {
    SplitMix64 sm(a ^ (b + 0x9e3779b97f4a7c15ull + (a << 6) + (a >> 2)));
    return sm.next();
}

/// Stage/stream seed derivation: hash the tag into the base seed so stages
/// and per-walk streams are independent yet reproducible.
inline uint64_t derive_seed(uint64_t base, std::string_view tag) {
    uint64_t h = 0xcbf29ce484222325ull; // FNV-1a
    for (unsigned char c : tag) {
        h ^= c;
        h *= 0x100000001b3ull;
    }
    return mix_seed(base, h);
}

inline uint64_t derive_seed(uint64_t base, uint64_t a, uint64_t b) {
    return mix_seed(mix_seed(base, a), b);
}

template <typename T>
void shuffle(std::span<T> items, Rng& rng) {
    for (size_t i = items.size(); i > 1; --i) {
        size_t j = static_cast<size_t>(rng.next_below(i));
        std::swap(items[i - 1], items[j]);
    }
}

template <typename T>
void shuffle(std::vector<T>& items, Rng& rng) {
    shuffle(std::span<T>(items), rng);
}

} // namespace fdrkit
