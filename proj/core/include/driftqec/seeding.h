#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace driftqec {

using Rng = std::mt19937_64;

/// One step of splitmix64. Used to spread a root seed into independent streams.
std::uint64_t splitmix64(std::uint64_t x);

/// Derives the seed for one named randomness stream.
///
/// Every stochastic component draws from its own stream so that adding a tile
/// or a sweep point never perturbs the numbers seen by any other component:
///
///     seed(root, tag, index) = splitmix64(splitmix64(root ^ fnv1a(tag)) + index)
std::uint64_t derive_seed(std::uint64_t root, std::string_view tag, std::uint64_t index = 0);

inline Rng make_rng(std::uint64_t root, std::string_view tag, std::uint64_t index = 0) {
    return Rng(derive_seed(root, tag, index));
}

/// Uniform double in [0, 1) from the top 53 bits. Unlike
/// std::uniform_real_distribution this is identical across standard libraries.
inline double uniform01(Rng &rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

}  // namespace driftqec
