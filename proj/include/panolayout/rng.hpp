#pragma once

#include <cstdint>
#include <random>

namespace panolayout {

using Rng = std::mt19937_64;

/// splitmix64 finalizer; used to derive independent per-item seeds.
constexpr std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Seed for work item `index` under a global seed. Results never depend on scheduling order.
constexpr std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index) {
  return mix64(mix64(seed) ^ (index * 0xd1342543de82ef95ULL + 0x632be59bd9b4e019ULL));
}

inline Rng make_rng(std::uint64_t seed, std::uint64_t index) { return Rng(derive_seed(seed, index)); }

// Stream tags so that different stages never share an RNG stream.
inline constexpr std::uint64_t kStreamLines = 0x11;
inline constexpr std::uint64_t kStreamVanishing = 0x22;
inline constexpr std::uint64_t kStreamHypotheses = 0x33;
inline constexpr std::uint64_t kStreamScene = 0x44;
inline constexpr std::uint64_t kStreamNormals = 0x55;

}  // namespace panolayout
