#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>
#include <string_view>

namespace compasskit {

using Rng = std::mt19937_64;

// splitmix64 finalizer; used to decorrelate derived seeds.
constexpr uint64_t mix64(uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// FNV-1a over the label bytes, independent of std::hash so seeds are stable
// across standard library implementations.
constexpr uint64_t hash_label(std::string_view label) {
  uint64_t h = 0xcbf29ce484222325ULL;
  for (char c : label) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001b3ULL;
  }
  return h;
}

/// Derive a child seed from a master seed, a stage label and any number of
/// integer indices. Adding a new stage or index never perturbs existing ones.
inline uint64_t derive_seed(uint64_t master, std::string_view label,
                            std::initializer_list<uint64_t> indices = {}) {
  uint64_t h = mix64(master ^ hash_label(label));
  for (uint64_t i : indices) h = mix64(h ^ mix64(i + 0x632be59bd9b4e019ULL));
  return h;
}

inline Rng make_rng(uint64_t seed) { return Rng{seed}; }

// Uniform double in [0,1) from the top 53 bits.
inline double uniform01(Rng& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

}  // namespace compasskit
