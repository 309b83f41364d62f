#pragma once

#include <cmath>
#include <cstdint>

namespace covcalc {

namespace detail {
// SplitMix64 finalizer: a full-avalanche 64-bit mixer.
inline std::uint64_t mix64(std::uint64_t z) {
    z += 0x9E3779B97F4A7C15ULL;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}
} // namespace detail

// Derives an independent sub-seed, e.g. for the Brownian and fractional
// components of a mixed ensemble.
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t tag) {
    return detail::mix64(detail::mix64(seed) ^ detail::mix64(tag * 0xD1B54A32D192ED03ULL + 0x8BB7));
}

/**
 * Counter-based generator: the value at counter c is a pure function of
 * (seed, stream, c). Sampling path m with stream=m therefore gives the same
 * numbers no matter how paths are partitioned across threads, which is what
 * makes ensemble output byte-identical for any --threads setting.
 */
struct CounterRng {
    std::uint64_t key;

    CounterRng(std::uint64_t seed, std::uint64_t stream)
        : key(detail::mix64(detail::mix64(seed) ^ (detail::mix64(stream) + 0x9E3779B97F4A7C15ULL))) {}

    // Uniform on the open interval (0,1).
    double uniform(std::uint64_t counter) const {
        const std::uint64_t r = detail::mix64(key ^ (counter * 0xA24BAED4963EE407ULL + 0x9FB21C651E98DF25ULL));
        return (static_cast<double>(r >> 11) + 0.5) * 0x1.0p-53;
    }

    // Standard normal via Box-Muller; consumes counters 2i and 2i+1.
    double normal(std::uint64_t i) const {
        const double u1 = uniform(2 * i);
        const double u2 = uniform(2 * i + 1);
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925286766559 * u2);
    }
};

} // namespace covcalc
