#pragma once

#include <cstdint>
#include <random>

namespace shapebo {

using Rng = std::mt19937_64;

/// splitmix64 step; used to derive independent sub-stream seeds so that
/// parallel or reordered work items stay reproducible.
inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream) {
    std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (stream + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

inline Rng make_rng(std::uint64_t seed, std::uint64_t stream = 0) {
    return Rng(mix_seed(seed, stream));
}

inline double uniform(Rng& rng, double lo = 0.0, double hi = 1.0) {
    return std::uniform_real_distribution<double>(lo, hi)(rng);
}

inline double gaussian(Rng& rng, double mean = 0.0, double sd = 1.0) {
    return std::normal_distribution<double>(mean, sd)(rng);
}

} // namespace shapebo
