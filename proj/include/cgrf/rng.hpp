#pragma once

// Counter-based deterministic random numbers. Every variate is a pure
// function of (seed, indices), so draws are reproducible bit-for-bit and
// independent of evaluation order or thread count.

#include <cmath>
#include <cstdint>

namespace cgrf {

namespace detail {
inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}
}  // namespace detail

// Hash a key path into a 64-bit state; each component is mixed in turn.
inline std::uint64_t rng_key(std::uint64_t seed, std::uint64_t a = 0, std::uint64_t b = 0,
                             std::uint64_t c = 0) {
    std::uint64_t s = detail::splitmix64(seed ^ 0x243F6A8885A308D3ULL);
    s = detail::splitmix64(s ^ a);
    s = detail::splitmix64(s ^ b);
    s = detail::splitmix64(s ^ c);
    return s;
}

// uniform in (0,1); never returns 0 or 1
inline double uniform01(std::uint64_t key) {
    const std::uint64_t bits = detail::splitmix64(key) >> 11;  // 53 bits
    return (static_cast<double>(bits) + 0.5) * 0x1.0p-53;
}

// standard normal via Box-Muller on two decorrelated uniforms
inline double normal01(std::uint64_t key) {
    const double u1 = uniform01(detail::splitmix64(key ^ 0x9E3779B97F4A7C15ULL));
    const double u2 = uniform01(detail::splitmix64(key ^ 0xD1B54A32D192ED03ULL));
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
}

// N(0,1) keyed by (seed, point index, draw index) per the sampling contract
inline double normal_draw(std::uint64_t seed, std::uint64_t point_idx, std::uint64_t draw_idx) {
    return normal01(rng_key(seed, point_idx, draw_idx));
}

// Halton radical-inverse low-discrepancy sequence (bases 2,3,5,...)
inline double halton(std::uint64_t index, unsigned base) {
    double f = 1.0, r = 0.0;
    while (index > 0) {
        f /= base;
        r += f * static_cast<double>(index % base);
        index /= base;
    }
    return r;
}

}  // namespace cgrf
