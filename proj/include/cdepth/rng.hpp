#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <vector>

namespace cdepth {

/// Version-pinned PRNG shared by every seeded operation in the toolkit.
///
/// Generator: xoshiro256** 1.0 (Blackman & Vigna), state seeded by four
/// successive outputs of SplitMix64 started at the user seed.
///   SplitMix64: x += 0x9E3779B97F4A7C15;
///               z = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9;
///               z = (z ^ (z >> 27)) * 0x94D049BB133111EB;
///               return z ^ (z >> 31);
///   xoshiro256**: result = rotl(s1 * 5, 7) * 9; t = s1 << 17;
///               s2 ^= s0; s3 ^= s1; s1 ^= s2; s0 ^= s3; s2 ^= t; s3 = rotl(s3, 45)
///
/// Derived draws:
///   uniform01()      = (next() >> 11) * 2^-53, in [0, 1)
///   uniform_below(k) = rejection sampling: threshold = (2^64 - k) mod k,
///                      draw r until r >= threshold, return r mod k
///   normal()         = Box-Muller cosine branch from two uniform01() draws,
///                      u1 mapped to (0,1] as 1 - uniform01()
///
/// Nothing here depends on <random> distributions, so streams reproduce
/// bit-for-bit across standard libraries and languages.
class Rng {
 public:
  static constexpr std::uint64_t kAlgorithmVersion = 1;

  explicit Rng(std::uint64_t seed);

  std::uint64_t next();
  double uniform01();
  std::uint64_t uniform_below(std::uint64_t bound);
  double normal();

 private:
  std::array<std::uint64_t, 4> state_{};
};

std::uint64_t splitmix64_next(std::uint64_t& x);

/// In-place Fisher-Yates: for i = n-1 down to 1, swap(v[i], v[uniform_below(i+1)]).
void shuffle_indices(std::vector<std::size_t>& v, Rng& rng);

}  // namespace cdepth
