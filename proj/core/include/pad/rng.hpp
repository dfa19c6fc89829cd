// Deterministic RNG used everywhere.  We roll our own distributions on top of
// xoshiro256++ so that results do not depend on the standard library's
// implementation-defined <random> distributions, and we derive child seeds by
// hashing so that parallel sample/candidate streams depend only on their
// logical index, never on scheduling.
#pragma once

#include <cmath>
#include <cstdint>
#include <string_view>

namespace pad {

inline std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// Order-sensitive seed derivation: derive(seed, a, b, ...) hashes each tag in
// turn.  Tags may be integers or strings.
inline std::uint64_t hash_tag(std::uint64_t h, std::uint64_t v) {
  std::uint64_t s = h ^ (v + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2));
  return splitmix64(s);
}

inline std::uint64_t hash_tag(std::uint64_t h, std::string_view s) {
  std::uint64_t acc = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) acc = (acc ^ c) * 0x100000001b3ULL;
  return hash_tag(h, acc);
}

inline std::uint64_t derive_seed(std::uint64_t seed) { return seed; }

template <typename T, typename... Rest>
std::uint64_t derive_seed(std::uint64_t seed, T&& tag, Rest&&... rest) {
  return derive_seed(hash_tag(seed, std::forward<T>(tag)), std::forward<Rest>(rest)...);
}

class Rng {
 public:
  explicit Rng(std::uint64_t seed = 0) {
    std::uint64_t sm = seed;
    for (auto& w : s_) w = splitmix64(sm);
  }

  std::uint64_t next_u64() {
    auto rotl = [](std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); };
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
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Uniform integer in [lo, hi] inclusive, via rejection (unbiased).
  long long uniform_int(long long lo, long long hi) {
    const std::uint64_t span = static_cast<std::uint64_t>(hi - lo) + 1;
    if (span == 0) return static_cast<long long>(next_u64());  // full range
    const std::uint64_t limit = ~std::uint64_t{0} - (~std::uint64_t{0} % span + 1) % span;
    std::uint64_t v = next_u64();
    while (v > limit) v = next_u64();
    return lo + static_cast<long long>(v % span);
  }

  // Standard normal via Box-Muller (two uniforms per draw, no cached spare).
  double normal() {
    double u1 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925286766559 * u2);
  }

 private:
  std::uint64_t s_[4];
};

}  // namespace pad
