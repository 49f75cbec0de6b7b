#pragma once

#include <cmath>
#include <cstdint>

#include "bp/math.hpp"

namespace bp {

// Counter-based generator: every variate is a pure hash of
// (seed, stream, counter), so draws are independent of evaluation order
// and of the number of worker threads.
namespace rng {

inline std::uint64_t mix64(std::uint64_t z) {
    z += 0x9E3779B97F4A7C15ull;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

inline std::uint64_t keyed(std::uint64_t seed, std::uint64_t stream, std::uint64_t ctr) {
    return mix64(mix64(mix64(seed) ^ stream) ^ ctr);
}

// uniform in (0,1); never returns 0 or 1
inline double uniform01(std::uint64_t bits) {
    return (static_cast<double>(bits >> 11) + 0.5) * 0x1.0p-53;
}

inline double uniform(std::uint64_t seed, std::uint64_t stream, std::uint64_t ctr) {
    return uniform01(keyed(seed, stream, ctr));
}

// Box-Muller pair from counters (ctr, ctr+1)
struct NormalPair {
    double z0, z1;
};

inline NormalPair normal_pair(std::uint64_t seed, std::uint64_t stream, std::uint64_t ctr) {
    double u1 = uniform(seed, stream, ctr);
    double u2 = uniform(seed, stream, ctr + 1);
    double r = std::sqrt(-2.0 * std::log(u1));
    double a = 2.0 * kPi * u2;
    return {r * std::cos(a), r * std::sin(a)};
}

}  // namespace rng
}  // namespace bp
