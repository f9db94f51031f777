#pragma once

#include <cstdint>
#include <random>

namespace nashae {

using Rng = std::mt19937_64;

/// Independent random streams derived from one master seed, so that
/// changing how one stream is consumed never perturbs another.
enum class Stream : std::uint64_t {
  Init = 1,
  Shuffle = 2,
  DatasetNoise = 3,
  Metric = 4,
  Synthetic = 5,
};

/// splitmix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

constexpr std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream,
                                    std::uint64_t index = 0) {
  return mix64(mix64(mix64(master) ^ stream) ^ index);
}

inline Rng make_rng(std::uint64_t master, Stream stream, std::uint64_t index = 0) {
  return Rng(derive_seed(master, static_cast<std::uint64_t>(stream), index));
}

}  // namespace nashae
