#pragma once

#include <bit>
#include <cstdint>
#include <random>

namespace plastigen {

/// SplitMix64 finalizer; used to derive independent substream seeds.
constexpr std::uint64_t mix64(std::uint64_t x) noexcept {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

constexpr std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t a, std::uint64_t b = 0,
                                    std::uint64_t c = 0) noexcept {
    return mix64(mix64(mix64(mix64(seed) ^ a) ^ b) ^ c);
}

/// Seeded random source.
///
/// Wraps std::mt19937_64 (whose output sequence is fixed by the standard) and
/// implements the derived distributions locally, so streams are identical
/// across standard library implementations. Single random bits are served
/// from a cached 64-bit word.
class Rng {
public:
    using result_type = std::uint64_t;

    explicit Rng(std::uint64_t seed = 0) : engine_(seed) {}

    static constexpr result_type min() { return 0; }
    static constexpr result_type max() { return ~result_type{0}; }
    result_type operator()() { return engine_(); }

    /// Uniform integer in [0, n). n must be positive.
    std::uint64_t below(std::uint64_t n) {
        // rejection on the top of the range removes modulo bias
        const std::uint64_t limit = max() - max() % n;
        std::uint64_t x;
        do {
            x = engine_();
        } while (x >= limit);
        return x % n;
    }

    /// Uniform integer in [lo, hi].
    std::int64_t between(std::int64_t lo, std::int64_t hi) {
        return lo + static_cast<std::int64_t>(below(static_cast<std::uint64_t>(hi - lo) + 1));
    }

    /// Uniform real in [0, 1).
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    bool chance(double p) { return uniform() < p; }

    bool bit() {
        if (bits_left_ == 0) {
            bit_cache_ = engine_();
            bits_left_ = 64;
        }
        const bool b = bit_cache_ & 1U;
        bit_cache_ >>= 1;
        --bits_left_;
        return b;
    }

    /// Number of fair-coin successes before the first failure, plus one.
    /// Geometric(1/2) on {1, 2, ...}.
    unsigned geometric_half() {
        unsigned n = 1;
        while (bit()) ++n;
        return n;
    }

private:
    std::mt19937_64 engine_;
    std::uint64_t bit_cache_ = 0;
    unsigned bits_left_ = 0;
};

}  // namespace plastigen
