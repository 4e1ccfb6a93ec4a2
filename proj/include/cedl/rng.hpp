#pragma once

#include <cstdint>
#include <random>

namespace cedl {

using Rng = std::mt19937_64;

// splitmix64 finalizer; used to derive independent per-task streams from a
// global seed so that serial and parallel runs draw identical numbers.
inline std::uint64_t mix_seed(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream, std::uint64_t index = 0) {
  return mix_seed(mix_seed(mix_seed(seed) ^ stream) ^ index);
}

inline Rng make_rng(std::uint64_t seed, std::uint64_t stream = 0, std::uint64_t index = 0) {
  return Rng(derive_seed(seed, stream, index));
}

}  // namespace cedl
