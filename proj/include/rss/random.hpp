#pragma once

#include <complex>
#include <cstdint>
#include <numbers>
#include <random>

namespace rss {

using Rng = std::mt19937_64;

/// Independent sub-streams of one experiment seed.
enum class Stream : std::uint64_t { Channel = 1, PilotNoise = 2, RandomInit = 3 };

inline std::uint64_t splitmix64(std::uint64_t x)
{
    x += 0x9E3779B97F4A7C15ull;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
    return x ^ (x >> 31);
}

/// Deterministic generator for (seed, trial, stream, salt).
inline Rng make_rng(std::uint64_t seed, std::uint64_t trial, Stream stream, std::uint64_t salt = 0)
{
    std::uint64_t h = splitmix64(seed);
    h = splitmix64(h ^ splitmix64(trial + 0x51ED27ull));
    h = splitmix64(h ^ static_cast<std::uint64_t>(stream));
    h = splitmix64(h ^ salt);
    std::seed_seq seq{static_cast<std::uint32_t>(h), static_cast<std::uint32_t>(h >> 32)};
    return Rng(seq);
}

/// Circularly-symmetric complex Gaussian with E|z|^2 = variance.
inline std::complex<double> complex_normal(Rng& rng, double variance)
{
    std::normal_distribution<double> nd(0.0, std::sqrt(variance / 2.0));
    const double re = nd(rng);
    const double im = nd(rng);
    return {re, im};
}

inline double uniform_phase(Rng& rng)
{
    std::uniform_real_distribution<double> ud(0.0, 2.0 * std::numbers::pi);
    return ud(rng);
}

} // namespace rss
