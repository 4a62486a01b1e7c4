#pragma once

#include <cstdint>
#include <string>
#include <string_view>

namespace ripple {

// Pinned hash and counter-based RNG. Everything that must be byte-identical
// across runs and platforms (local embeddings, item ids, answer shuffles,
// simulated answers) goes through these and never through <random>
// distributions, whose output is implementation-defined.

inline constexpr std::uint64_t kFnvOffset = 0xcbf29ce484222325ULL;
inline constexpr std::uint64_t kFnvPrime = 0x100000001b3ULL;

constexpr std::uint64_t fnv1a64(std::string_view bytes, std::uint64_t h = kFnvOffset) noexcept {
    for (unsigned char c : bytes) {
        h ^= c;
        h *= kFnvPrime;
    }
    return h;
}

constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

constexpr std::uint64_t mix(std::uint64_t a, std::uint64_t b) noexcept {
    return splitmix64(a ^ splitmix64(b));
}

/// Uniform double in [0, 1) from the top 53 bits.
constexpr double unit_uniform(std::uint64_t bits) noexcept {
    return static_cast<double>(bits >> 11) * 0x1.0p-53;
}

/// Unbiased integer in [0, bound) drawn from a counter stream.
inline std::uint64_t bounded(std::uint64_t seed, std::uint64_t counter, std::uint64_t bound) noexcept {
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % bound;
    for (std::uint64_t i = 0;; ++i) {
        std::uint64_t r = mix(seed, counter * 0x100000001ULL + i);
        if (r < limit) return r % bound;
    }
}

std::string hex64(std::uint64_t v);

}  // namespace ripple
