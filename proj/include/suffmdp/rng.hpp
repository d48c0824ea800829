#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>

namespace suffmdp {

using Rng = std::mt19937_64;

constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Deterministic substream seed for a (seed, key...) path. Every stochastic
/// step keys its own stream so results do not depend on evaluation order.
constexpr std::uint64_t derive_seed(std::uint64_t seed,
                                    std::initializer_list<std::uint64_t> keys) noexcept {
  std::uint64_t h = splitmix64(seed);
  for (std::uint64_t k : keys) h = splitmix64(h ^ splitmix64(k + 0x632be59bd9b4e019ULL));
  return h;
}

inline Rng make_rng(std::uint64_t seed) { return Rng(splitmix64(seed)); }

inline Rng make_rng(std::uint64_t seed, std::initializer_list<std::uint64_t> keys) {
  return Rng(derive_seed(seed, keys));
}

// Stream tags keep substreams of different stages disjoint.
namespace stream {
inline constexpr std::uint64_t kScreen = 0x5c;
inline constexpr std::uint64_t kStratum = 0x57;
inline constexpr std::uint64_t kInit = 0x11;
inline constexpr std::uint64_t kBatch = 0xba;
inline constexpr std::uint64_t kFolds = 0xf0;
inline constexpr std::uint64_t kCell = 0xce;
inline constexpr std::uint64_t kDimension = 0xd1;
inline constexpr std::uint64_t kResidual = 0x7e;
inline constexpr std::uint64_t kOuter = 0x0e;
inline constexpr std::uint64_t kTnn = 0x7a;
inline constexpr std::uint64_t kSubject = 0x5b;
inline constexpr std::uint64_t kRollout = 0x70;
inline constexpr std::uint64_t kQ = 0x9a;
inline constexpr std::uint64_t kReplicate = 0x4e;
}  // namespace stream

}  // namespace suffmdp
