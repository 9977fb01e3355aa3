#pragma once

#include <cstdint>
#include <string>
#include <string_view>

namespace synthtools::rng {

// FNV-1a, used for cassette digests and seed derivation. Collisions are
// tolerated wherever it is used: cassettes store the full request and
// check it on insert.
inline std::uint64_t fnv1a64(std::string_view text) {
    std::uint64_t hash = 1469598103934665603ull;
    for (unsigned char c : text) {
        hash ^= c;
        hash *= 1099511628211ull;
    }
    return hash;
}

inline std::string hex64(std::uint64_t value) {
    static const char* digits = "0123456789abcdef";
    std::string out(16, '0');
    for (int i = 15; i >= 0; --i) {
        out[static_cast<std::size_t>(i)] = digits[value & 0xf];
        value >>= 4;
    }
    return out;
}

// splitmix64: tiny deterministic generator whose output stream is pinned
// by this code rather than by the standard library, so frozen test values
// survive toolchain changes.
struct SplitMix64 {
    std::uint64_t state;

    explicit SplitMix64(std::uint64_t seed) : state(seed) {}

    std::uint64_t next() {
        state += 0x9e3779b97f4a7c15ull;
        std::uint64_t z = state;
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
        return z ^ (z >> 31);
    }

    // Unbiased-enough bounded draw (multiply-shift); n must be > 0.
    std::uint64_t bounded(std::uint64_t n) {
        return static_cast<std::uint64_t>(
            (static_cast<unsigned __int128>(next()) * n) >> 64);
    }

    double uniform01() {
        return static_cast<double>(next() >> 11) * 0x1.0p-53;
    }
};

inline std::uint64_t derive_seed(std::uint64_t seed, std::string_view label) {
    return fnv1a64(label) ^ (seed * 0x9e3779b97f4a7c15ull + 0x165667b19e3779f9ull);
}

}  // namespace synthtools::rng
