// Portable seeded PRNG used everywhere randomness must replay identically:
// scenario noise, link loss draws, station stagger. Never std::mt19937 or
// std::hash, whose streams are not pinned across standard libraries.
#pragma once

#include <cstdint>
#include <string_view>

namespace gasnet {

// splitmix64 finalizer (Steele et al.); full 64-bit avalanche.
constexpr std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

constexpr std::uint64_t hash_combine(std::uint64_t seed, std::uint64_t v) {
  return mix64(seed + 0x9e3779b97f4a7c15ULL + v);
}

// FNV-1a over bytes; stable station-id hashing for stagger offsets.
constexpr std::uint64_t fnv1a64(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

class SplitMix64 {
 public:
  constexpr explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

  constexpr std::uint64_t next() {
    state_ += 0x9e3779b97f4a7c15ULL;
    return mix64(state_);
  }

  // Uniform in [0, 1); 53 mantissa bits, exact IEEE arithmetic.
  double next_unit() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  // Approximately standard normal via the sum of 12 uniforms (Irwin-Hall).
  // Uses only additions of exactly representable values, so the stream is
  // bit-identical on every IEEE-754 platform; bounded in [-6, 6].
  double next_gaussian() {
    double acc = 0.0;
    for (int i = 0; i < 12; ++i) acc += next_unit();
    return acc - 6.0;
  }

 private:
  std::uint64_t state_;
};

}  // namespace gasnet
