#pragma once

// Reproducible random streams.
//
// Engine: xoshiro256** (Blackman & Vigna), state expanded from a 64-bit seed
// with splitmix64. All variate transforms are implemented here rather than
// through <random> distributions, whose output is implementation-defined.

#include <cmath>
#include <cstdint>
#include <numbers>

namespace sparserec {

inline constexpr std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

/// Mixes (seed, stream id) into a fresh seed for an independent substream.
inline constexpr std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
    std::uint64_t s = seed ^ (stream * 0xD1B54A32D192ED03ULL);
    splitmix64(s);
    return splitmix64(s);
}

class RngStream {
public:
    static constexpr const char* kAlgorithm = "xoshiro256**/splitmix64";

    explicit RngStream(std::uint64_t seed) : seed_(seed) {
        std::uint64_t sm = seed;
        for (auto& w : s_) w = splitmix64(sm);
    }

    std::uint64_t seed() const { return seed_; }

    /// Independent stream keyed by (this seed, id).
    RngStream substream(std::uint64_t id) const { return RngStream(derive_seed(seed_, id)); }

    std::uint64_t next_u64() {
        const std::uint64_t result = rotl(s_[1] * 5, 7) * 9;
        const std::uint64_t t = s_[1] << 17;
        s_[2] ^= s_[0];
        s_[3] ^= s_[1];
        s_[1] ^= s_[2];
        s_[0] ^= s_[3];
        s_[2] ^= t;
        s_[3] = rotl(s_[3], 45);
        return result;
    }

    /// Uniform on [0, 1).
    double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    /// Uniform on (0, 1); safe as a log argument.
    double uniform_open() { return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    /// +1 or -1 with equal probability.
    double sign() { return (next_u64() >> 63) ? 1.0 : -1.0; }

    /// Uniform integer in [0, bound).
    std::uint64_t below(std::uint64_t bound) {
        // Lemire's multiply-shift with rejection.
        __uint128_t m = static_cast<__uint128_t>(next_u64()) * bound;
        auto low = static_cast<std::uint64_t>(m);
        if (low < bound) {
            const std::uint64_t threshold = (0 - bound) % bound;
            while (low < threshold) {
                m = static_cast<__uint128_t>(next_u64()) * bound;
                low = static_cast<std::uint64_t>(m);
            }
        }
        return static_cast<std::uint64_t>(m >> 64);
    }

    /// Standard normal via the Marsaglia polar method.
    double normal() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        double u, v, r2;
        do {
            u = 2.0 * uniform() - 1.0;
            v = 2.0 * uniform() - 1.0;
            r2 = u * u + v * v;
        } while (r2 >= 1.0 || r2 == 0.0);
        const double f = std::sqrt(-2.0 * std::log(r2) / r2);
        spare_ = v * f;
        has_spare_ = true;
        return u * f;
    }

    /// Standard exponential (rate 1).
    double exponential() { return -std::log(uniform_open()); }

private:
    static constexpr std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

    std::uint64_t seed_;
    std::uint64_t s_[4]{};
    double spare_ = 0.0;
    bool has_spare_ = false;
};

}  // namespace sparserec
