#pragma once

#include <cstdint>
#include <random>

namespace hybridfl {

using Rng = std::mt19937_64;

// Independent sub-stream seeds from one experiment seed (splitmix64 mix).
constexpr std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream) {
  std::uint64_t z = base + 0x9E3779B97F4A7C15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

// Stream identifiers for derive_seed.
enum SeedStream : std::uint64_t {
  kGeneratorStream = 1,
  kSplitStream = 2,
  kInitStream = 3,
  kShuffleStream = 4,
  kDropoutStream = 5,
};

}  // namespace hybridfl
