#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace cogmpr {

/// SplitMix64 output function.
inline std::uint64_t splitmix64_mix(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

/// Seed for substream `index` of a run seeded with `base`: the (index+1)-th
/// output of a SplitMix64 sequence started at `base`. This derivation is part
/// of the reproducibility contract and must not change.
inline std::uint64_t stream_seed(std::uint64_t base, std::uint64_t index) {
    constexpr std::uint64_t gamma = 0x9E3779B97F4A7C15ULL;
    return splitmix64_mix(base + (index + 1) * gamma);
}

/// Draws on top of std::mt19937_64. The engine's output sequence is fixed by
/// the standard; the transforms below deliberately avoid std::*_distribution,
/// whose algorithms vary between standard libraries, so a given seed yields
/// bit-identical draws on every platform.
class Sampler {
public:
    explicit Sampler(std::uint64_t seed) : engine_(seed) {}

    /// Uniform in [0, 1) with 53-bit resolution.
    double uniform01() {
        return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
    }

    /// Uniform in (0, 1); never returns an endpoint.
    double uniform01_open() {
        return (static_cast<double>(engine_() >> 11) + 0.5) * 0x1.0p-53;
    }

    /// One coin flip; consumes exactly one engine draw for any p.
    bool bernoulli(double p) {
        return uniform01() < p;
    }

    /// Exponential with the given mean, strictly positive.
    double exponential(double mean) {
        return -mean * std::log(uniform01_open());
    }

    std::uint64_t raw() { return engine_(); }

private:
    std::mt19937_64 engine_;
};

} // namespace cogmpr
