#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace tbslab {

using Rng = std::mt19937_64;

inline constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// FNV-1a; used to key streams by experiment name.
inline constexpr std::uint64_t hash_tag(std::string_view tag) noexcept {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (char c : tag) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001b3ULL;
  }
  return h;
}

/// Deterministic child seed. Distinct (parent, key) pairs give statistically
/// independent streams.
inline constexpr std::uint64_t derive_seed(std::uint64_t parent,
                                           std::uint64_t key) noexcept {
  return splitmix64(splitmix64(parent) ^ splitmix64(key + 0x632be59bd9b4e019ULL));
}

inline constexpr std::uint64_t derive_seed(std::uint64_t parent,
                                           std::string_view tag) noexcept {
  return derive_seed(parent, hash_tag(tag));
}

/// Per-trial substreams. Field and noise streams depend only on the trial,
/// so different sampling modes evaluated from one seed see the same fields
/// and noise (common random numbers).
enum class Substream : std::uint64_t { field = 1, mask = 2, noise = 3 };

inline Rng trial_rng(std::uint64_t seed, std::uint64_t trial, Substream which) {
  return Rng(derive_seed(derive_seed(seed, trial),
                         static_cast<std::uint64_t>(which)));
}

}  // namespace tbslab
