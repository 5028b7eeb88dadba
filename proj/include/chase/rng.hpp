#pragma once

#include <cmath>
#include <cstdint>
#include <limits>

namespace chase {

/// SplitMix64 (Steele, Lea & Flood 2014): 64-bit state, one add and a
/// three-stage mix per output. Every sampler in the library draws from this
/// generator through the helpers below, never through <random>
/// distributions, so traces are bit-identical across compilers and platforms.
class SplitMix64 {
public:
    using result_type = std::uint64_t;

    explicit SplitMix64(std::uint64_t seed = 0) noexcept : state_(seed) {}

    static constexpr result_type min() noexcept { return 0; }
    static constexpr result_type max() noexcept { return std::numeric_limits<result_type>::max(); }

    result_type operator()() noexcept {
        state_ += 0x9E3779B97F4A7C15ULL;
        return mix(state_);
    }

    std::uint64_t state() const noexcept { return state_; }

    /// The SplitMix64 output finalizer, usable as a standalone hash.
    static constexpr std::uint64_t mix(std::uint64_t z) noexcept {
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }

private:
    std::uint64_t state_;
};

/// Seed for stream `index` under `master`:
///   mix(master ^ mix(index + 0x9E3779B97F4A7C15)).
/// Streams depend only on (master, index), so episodes can run in any order
/// or on any thread and still reproduce.
constexpr std::uint64_t deriveSeed(std::uint64_t master, std::uint64_t index) noexcept {
    return SplitMix64::mix(master ^ SplitMix64::mix(index + 0x9E3779B97F4A7C15ULL));
}

/// Uniform double in [0, 1) from the top 53 bits.
inline double uniform01(SplitMix64& rng) noexcept {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

/// Uniform integer in [0, n) by multiply-shift (Lemire, without rejection;
/// bias is below 2^-40 for the small n used here).
inline std::uint64_t uniformIndex(SplitMix64& rng, std::uint64_t n) noexcept {
    return static_cast<std::uint64_t>((static_cast<unsigned __int128>(rng()) * n) >> 64);
}

/// Standard normal via the Marsaglia polar method.
inline double standardNormal(SplitMix64& rng) noexcept {
    for (;;) {
        const double u = 2.0 * uniform01(rng) - 1.0;
        const double v = 2.0 * uniform01(rng) - 1.0;
        const double s = u * u + v * v;
        if (s > 0.0 && s < 1.0) return u * std::sqrt(-2.0 * std::log(s) / s);
    }
}

/// Gamma(shape, 1) via Marsaglia & Tsang (2000); shape < 1 uses the
/// U^(1/shape) boost.
inline double gammaSample(SplitMix64& rng, double shape) noexcept {
    if (shape < 1.0) {
        const double u = uniform01(rng);
        return gammaSample(rng, shape + 1.0) * std::pow(u, 1.0 / shape);
    }
    const double d = shape - 1.0 / 3.0;
    const double c = 1.0 / std::sqrt(9.0 * d);
    for (;;) {
        double x = 0.0;
        double v = 0.0;
        do {
            x = standardNormal(rng);
            v = 1.0 + c * x;
        } while (v <= 0.0);
        v = v * v * v;
        const double u = uniform01(rng);
        if (u < 1.0 - 0.0331 * x * x * x * x) return d * v;
        if (std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) return d * v;
    }
}

inline double betaSample(SplitMix64& rng, double a, double b) noexcept {
    const double x = gammaSample(rng, a);
    const double y = gammaSample(rng, b);
    return x / (x + y);
}

}  // namespace chase
