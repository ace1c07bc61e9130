#pragma once

#include <array>
#include <cstdint>
#include <cstring>

namespace oscl {

// SplitMix64 step. Used for seeding and for stream derivation so that
// golden reports are bit-exact across platforms.
inline uint64_t splitmix64(uint64_t& state) {
  state += 0x9E3779B97F4A7C15ULL;
  uint64_t z = state;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

inline uint64_t mix64(uint64_t x) {
  uint64_t s = x;
  return splitmix64(s);
}

// xoshiro256** by Blackman & Vigna, seeded through SplitMix64.
class Xoshiro256ss {
 public:
  Xoshiro256ss() : Xoshiro256ss(0) {}

  explicit Xoshiro256ss(uint64_t seed) {
    uint64_t sm = seed;
    for (auto& w : s_) w = splitmix64(sm);
  }

  uint64_t next() {
    const uint64_t result = rotl(s_[1] * 5, 7) * 9;
    const uint64_t t = s_[1] << 17;
    s_[2] ^= s_[0];
    s_[3] ^= s_[1];
    s_[1] ^= s_[2];
    s_[0] ^= s_[3];
    s_[2] ^= t;
    s_[3] = rotl(s_[3], 45);
    return result;
  }

  // Uniform double in [0,1) with 53 random bits.
  double next_double() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  // Unbiased integer in [0, n). Lemire's method with rejection; n >= 1.
  uint64_t next_below(uint64_t n) {
    uint64_t x = next();
    __uint128_t m = static_cast<__uint128_t>(x) * n;
    uint64_t l = static_cast<uint64_t>(m);
    if (l < n) {
      const uint64_t t = (0 - n) % n;
      while (l < t) {
        x = next();
        m = static_cast<__uint128_t>(x) * n;
        l = static_cast<uint64_t>(m);
      }
    }
    return static_cast<uint64_t>(m >> 64);
  }

  bool next_bit() { return (next() >> 63) != 0; }

 private:
  static uint64_t rotl(uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }
  std::array<uint64_t, 4> s_{};
};

// Per-trial stream: seed XOR trial index pushed through SplitMix64.
inline Xoshiro256ss trial_stream(uint64_t seed, uint64_t trial) {
  return Xoshiro256ss(mix64(seed ^ trial));
}

// Derived substream for auxiliary randomness (shared strings, hash seeds).
// `tag` separates roles, `a`/`b` index within a role.
inline Xoshiro256ss derived_stream(uint64_t seed, uint64_t tag, uint64_t a = 0, uint64_t b = 0) {
  uint64_t s = seed;
  s = mix64(s ^ (0x9E6C63D0876A3F6BULL * (tag + 1)));
  s = mix64(s ^ (0xD2B74407B1CE6E93ULL * (a + 1)));
  s = mix64(s ^ (0xCA5A826395121157ULL * (b + 1)));
  return Xoshiro256ss(s);
}

// One-bit hash of an index, keyed by `hash_seed`. Stands in for the
// uniformly random boolean functions the hashing step calls for; collision
// statistics are tested against Binomial(n, 1/2).
inline int hash_bit(uint64_t hash_seed, uint64_t index) {
  return static_cast<int>(mix64(hash_seed ^ (index + 0x9E3779B97F4A7C15ULL)) >> 63);
}

}  // namespace oscl
