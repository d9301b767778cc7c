#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>

namespace qmaze {

using Rng = std::mt19937_64;

inline std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Child seed for an independent stream. Every random draw in the library
/// descends from a caller seed through this function, so results depend only
/// on (seed, stream path).
inline std::uint64_t derive_seed(std::uint64_t seed,
                                 std::initializer_list<std::uint64_t> path) {
  std::uint64_t state = seed;
  std::uint64_t out = splitmix64(state);
  for (auto tag : path) {
    state = out ^ (tag * 0xd1b54a32d192ed03ULL);
    out = splitmix64(state);
  }
  return out;
}

inline Rng make_rng(std::uint64_t seed, std::initializer_list<std::uint64_t> path = {}) {
  return Rng(derive_seed(seed, path));
}

// Stream tags.
namespace stream {
inline constexpr std::uint64_t kGenerator = 1;
inline constexpr std::uint64_t kStartGoal = 2;
inline constexpr std::uint64_t kLabel = 3;
inline constexpr std::uint64_t kRead = 4;
inline constexpr std::uint64_t kUpdateInit = 5;
inline constexpr std::uint64_t kUpdateRandom = 6;
inline constexpr std::uint64_t kAnneal = 7;
inline constexpr std::uint64_t kBot = 8;
inline constexpr std::uint64_t kBench = 9;
}  // namespace stream

}  // namespace qmaze
