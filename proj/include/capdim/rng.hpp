#pragma once

#include <cmath>
#include <cstdint>
#include <string_view>

namespace capdim {

// Every random quantity in the library is drawn from an Rng that was derived
// from one user-supplied seed, either directly or through named/indexed child
// streams.  Two runs with the same seed therefore produce identical samples
// no matter how the work is chunked.

inline std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ull);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

inline std::uint64_t hash_name(std::string_view name) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (char c : name) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001b3ull;
  }
  return h;
}

// xoshiro256++ seeded via splitmix64, with Box-Muller normals.  The uniform
// mapping (x >> 11) * 2^-53 is spelled out here instead of going through
// std::uniform_real_distribution so the stream is pinned down by this file
// alone, not by the standard library's distribution internals.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : seed_(seed) {
    std::uint64_t sm = seed;
    for (auto& word : s_) word = splitmix64(sm);
  }

  std::uint64_t seed() const { return seed_; }

  std::uint64_t next_u64() {
    const std::uint64_t result = rotl(s_[0] + s_[3], 23) + s_[0];
    const std::uint64_t t = s_[1] << 17;
    s_[2] ^= s_[0];
    s_[3] ^= s_[1];
    s_[1] ^= s_[2];
    s_[0] ^= s_[3];
    s_[2] ^= t;
    s_[3] = rotl(s_[3], 45);
    return result;
  }

  // Uniform in [0, 1).
  double uniform01() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  // Uniform in (0, 1); safe as a log() argument.
  double uniform_open() {
    return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
  }

  // Standard normal via Box-Muller; the paired draw is cached.
  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    const double u = uniform_open();
    const double v = uniform01();
    const double rad = std::sqrt(-2.0 * std::log(u));
    const double ang = 6.283185307179586476925286766559 * v;
    spare_ = rad * std::sin(ang);
    has_spare_ = true;
    return rad * std::cos(ang);
  }

  // Child streams.  Distinct names or indices give decorrelated streams, and
  // the derivation is pure, so child(i) is the same no matter how many draws
  // the parent has made.
  Rng child(std::string_view name) const {
    std::uint64_t s = seed_ ^ 0x6a09e667f3bcc908ull;
    splitmix64(s);
    s ^= hash_name(name);
    return Rng(splitmix64(s));
  }

  Rng child(std::uint64_t index) const {
    std::uint64_t s = seed_ ^ 0xbb67ae8584caa73bull;
    splitmix64(s);
    s ^= index * 0x9e3779b97f4a7c15ull + 0x2545f4914f6cdd1dull;
    return Rng(splitmix64(s));
  }

 private:
  static std::uint64_t rotl(std::uint64_t x, int k) {
    return (x << k) | (x >> (64 - k));
  }

  std::uint64_t seed_;
  std::uint64_t s_[4];
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace capdim
