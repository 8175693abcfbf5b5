#pragma once

#include <cstdint>
#include <random>
#include <sstream>
#include <string>

namespace wander {

// std::uniform_real_distribution is implementation-defined, so draws are built
// directly from the engine output to keep seeded runs portable.
using Rng = std::mt19937_64;

/// Uniform double in [0, 1) from the top 53 bits of one engine draw.
inline double uniform01(Rng& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

inline double uniform(Rng& rng, double lo, double hi) {
    return lo + (hi - lo) * uniform01(rng);
}

/// Derive an independent child seed (splitmix64 finalizer).
inline std::uint64_t sub_seed(std::uint64_t seed, std::uint64_t stream) {
    std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (stream + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

inline std::string rng_state(const Rng& rng) {
    std::ostringstream os;
    os << rng;
    return os.str();
}

inline Rng rng_from_state(const std::string& state) {
    Rng rng;
    std::istringstream is(state);
    is >> rng;
    return rng;
}

} // namespace wander
