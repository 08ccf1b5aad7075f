#pragma once

// Counter-based deterministic noise. Every draw is a pure function of
// (seed, domain, stream, index), so identical configurations produce
// identical noise regardless of thread schedule or evaluation order, and
// the streaming and offline paths can share draws exactly.

#include <cmath>
#include <cstdint>
#include <numbers>

namespace dpmean {

// Domain tags keep independent consumers of the same seed uncorrelated.
inline constexpr std::uint64_t kDomainStreamNoise = 0x1;
inline constexpr std::uint64_t kDomainMechanismNoise = 0x2;
inline constexpr std::uint64_t kDomainHistogramNoise = 0x3;
inline constexpr std::uint64_t kDomainSyntheticData = 0x4;
inline constexpr std::uint64_t kDomainTrial = 0x5;

inline std::uint64_t mix64(std::uint64_t x) {
    x ^= x >> 30;
    x *= 0xbf58476d1ce4e5b9ULL;
    x ^= x >> 27;
    x *= 0x94d049bb133111ebULL;
    x ^= x >> 31;
    return x;
}

inline std::uint64_t hash_counter(std::uint64_t seed, std::uint64_t domain, std::uint64_t stream,
                                  std::uint64_t index) {
    std::uint64_t h = mix64(seed + 0x9e3779b97f4a7c15ULL);
    h = mix64(h ^ (domain + 0x9e3779b97f4a7c15ULL));
    h = mix64(h ^ (stream + 0x9e3779b97f4a7c15ULL));
    h = mix64(h ^ (index + 0x9e3779b97f4a7c15ULL));
    return h;
}

/// Derive an independent seed, e.g. one per Monte-Carlo trial.
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t salt) {
    return mix64(mix64(seed + 0x9e3779b97f4a7c15ULL) ^ mix64(salt + 0x7f4a7c159e3779b9ULL));
}

/// Uniform in (0, 1), never exactly 0 or 1.
inline double uniform01(std::uint64_t seed, std::uint64_t domain, std::uint64_t stream,
                        std::uint64_t index) {
    const std::uint64_t h = hash_counter(seed, domain, stream, index);
    return (static_cast<double>(h >> 11) + 0.5) * 0x1.0p-53;
}

/// Standard normal via Box-Muller on two counter-derived uniforms.
inline double gaussian(std::uint64_t seed, std::uint64_t domain, std::uint64_t stream,
                       std::uint64_t index) {
    const double u1 = uniform01(seed, domain, stream, 2 * index);
    const double u2 = uniform01(seed, domain, stream, 2 * index + 1);
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

}  // namespace dpmean
