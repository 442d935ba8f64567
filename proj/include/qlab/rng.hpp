#pragma once

#include <cstdint>

namespace qlab {

/// Counter-based uniform stream: draw i of stream `seed` is a pure function of
/// (seed, i), so trials can run in any order, or concurrently, with
/// bit-identical results. This is the splitmix64 generator evaluated at an
/// arbitrary counter position.
namespace rng {

inline std::uint64_t splitmix64(std::uint64_t state) {
  std::uint64_t z = state + 0x9E3779B97F4A7C15ULL;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

inline std::uint64_t bits(std::uint64_t seed, std::uint64_t index) {
  return splitmix64(seed + index * 0x9E3779B97F4A7C15ULL);
}

/// Uniform double in [0, 1) with 53 random bits.
inline double uniform01(std::uint64_t seed, std::uint64_t index) {
  return static_cast<double>(bits(seed, index) >> 11) * 0x1.0p-53;
}

/// Derive an unrelated stream, e.g. for a retry with a fresh seed.
inline std::uint64_t derive(std::uint64_t seed, std::uint64_t salt) {
  return splitmix64(seed ^ (0xD1B54A32D192ED03ULL + salt));
}

}  // namespace rng
}  // namespace qlab
