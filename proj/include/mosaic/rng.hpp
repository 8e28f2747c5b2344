#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <string_view>

namespace mosaic {

// std::uniform_real_distribution and friends are implementation-defined, so
// seeded outputs would differ across standard libraries. Everything random in
// this library goes through these helpers instead; mt19937_64 itself is
// specified bit-exactly by the standard.
inline double det_uniform(std::mt19937_64& rng) {
    // 53 random bits -> [0, 1)
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

inline double det_uniform(std::mt19937_64& rng, double lo, double hi) {
    return lo + (hi - lo) * det_uniform(rng);
}

// Box-Muller; consumes two draws per call.
inline double det_gaussian(std::mt19937_64& rng) {
    double u1 = det_uniform(rng);
    double u2 = det_uniform(rng);
    if (u1 < 1e-300) u1 = 1e-300;
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
}

// FNV-1a, used to derive stable per-token seeds for the toy text encoder.
inline std::uint64_t fnv1a64(std::string_view s) {
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

}  // namespace mosaic
