#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>

namespace fairx {

using Rng = std::mt19937_64;

// splitmix64 finalizer; used to derive independent streams from a master seed.
inline std::uint64_t mix64(std::uint64_t z) {
  z += 0x9E3779B97F4A7C15ULL;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

// Derive a per-run stream from (master seed, stream indices). Runs executed
// in parallel each get their own Rng, so schedules cannot affect results.
inline Rng derive_rng(std::initializer_list<std::uint64_t> keys) {
  std::uint64_t s = 0x243F6A8885A308D3ULL;
  for (std::uint64_t k : keys) s = mix64(s ^ mix64(k));
  return Rng(s);
}

inline double draw_uniform(Rng& rng) {
  return std::uniform_real_distribution<double>(0.0, 1.0)(rng);
}

inline double draw_normal(Rng& rng) {
  return std::normal_distribution<double>(0.0, 1.0)(rng);
}

}  // namespace fairx
