#pragma once

#include <cmath>
#include <cstdint>
#include <initializer_list>

namespace nmcsim {

// Deterministic, platform-independent random generation. std::* distributions
// are not bit-stable across standard libraries, so everything here is spelled
// out. CounterRng is a keyed, stateless-style generator: the same key tuple
// always yields the same stream, independent of what other streams were drawn
// in between. That property is what makes parallel Monte Carlo runs and
// per-trial delay sampling reproducible.

constexpr std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

// Mix an arbitrary key tuple into one 64-bit state.
inline std::uint64_t mix_key(std::initializer_list<std::uint64_t> words) {
    std::uint64_t h = 0x2545f4914f6cdd1dULL;
    for (std::uint64_t w : words) h = splitmix64(h ^ w);
    return h;
}

class CounterRng {
public:
    explicit CounterRng(std::uint64_t seed) : key_(splitmix64(seed)) {}

    CounterRng(std::uint64_t seed, std::uint64_t stream)
        : key_(mix_key({seed, stream})) {}

    CounterRng(std::uint64_t seed, std::uint64_t stream_a, std::uint64_t stream_b)
        : key_(mix_key({seed, stream_a, stream_b})) {}

    std::uint64_t next_u64() { return splitmix64(key_ ^ counter_++); }

    // Uniform in [0, 1), 53-bit resolution.
    double next_unit() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    // Uniform in (0, 1]; safe as a log() argument.
    double next_unit_pos() {
        return (static_cast<double>(next_u64() >> 11) + 1.0) * 0x1.0p-53;
    }

    double next_uniform(double lo, double hi) {
        return lo + (hi - lo) * next_unit();
    }

    // Unbiased integer in [0, n).
    std::uint64_t next_below(std::uint64_t n) {
        const std::uint64_t limit = ~std::uint64_t{0} - (~std::uint64_t{0} % n);
        std::uint64_t v = next_u64();
        while (v >= limit) v = next_u64();
        return v % n;
    }

    // Standard normal via Box-Muller (second value cached).
    double next_normal() {
        if (have_cached_) {
            have_cached_ = false;
            return cached_;
        }
        const double u1 = next_unit_pos();
        const double u2 = next_unit();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double theta = 6.283185307179586476925286766559 * u2;
        cached_ = r * std::sin(theta);
        have_cached_ = true;
        return r * std::cos(theta);
    }

private:
    std::uint64_t key_;
    std::uint64_t counter_ = 0;
    double cached_ = 0.0;
    bool have_cached_ = false;
};

}  // namespace nmcsim
