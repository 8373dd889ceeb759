#include <gtest/gtest.h>

#include <algorithm>
#include <numeric>

#include "cdepth/probe.hpp"
#include "cdepth/rng.hpp"

using namespace cdepth;

// Reference outputs produced by a separate Python implementation of the
// generator (pure integer arithmetic, no shared code).

TEST(SplitMix64, FirstOutputFromZero) {
  std::uint64_t x = 0;
  EXPECT_EQ(splitmix64_next(x), 0xe220a8397b1dcdafULL);
}

TEST(Rng, Seed42Stream) {
  Rng rng(42);
  EXPECT_EQ(rng.next(), 0x15780b2e0c2ec716ULL);
  EXPECT_EQ(rng.next(), 0x6104d9866d113a7eULL);
  EXPECT_EQ(rng.next(), 0xae17533239e499a1ULL);
}

TEST(Rng, Uniform01UsesTop53Bits) {
  Rng a(42);
  Rng b(42);
  const double u = a.uniform01();
  EXPECT_EQ(u, static_cast<double>(b.next() >> 11) * 0x1.0p-53);
  EXPECT_GE(u, 0.0);
  EXPECT_LT(u, 1.0);
}

TEST(Rng, UniformBelowStaysInRange) {
  Rng rng(7);
  for (int i = 0; i < 10000; ++i) {
    EXPECT_LT(rng.uniform_below(3), 3u);
  }
  EXPECT_EQ(rng.uniform_below(1), 0u);
}

TEST(Rng, NormalMoments) {
  Rng rng(123);
  const int n = 200000;
  double sum = 0.0;
  double sq = 0.0;
  for (int i = 0; i < n; ++i) {
    const double z = rng.normal();
    sum += z;
    sq += z * z;
  }
  const double mean = sum / n;
  EXPECT_NEAR(mean, 0.0, 0.01);
  EXPECT_NEAR(sq / n - mean * mean, 1.0, 0.02);
}

TEST(Shuffle, Seed42Permutation) {
  std::vector<std::size_t> v(10);
  std::iota(v.begin(), v.end(), 0);
  Rng rng(42);
  shuffle_indices(v, rng);
  EXPECT_EQ(v, (std::vector<std::size_t>{7, 3, 8, 9, 5, 6, 4, 1, 0, 2}));
}

TEST(Split, Seed42TenItems) {
  ProbeConfig c;
  const auto s = split(10, c);
  EXPECT_EQ(s.train, (std::vector<std::size_t>{1, 3, 4, 5, 6, 7, 8, 9}));
  EXPECT_EQ(s.test, (std::vector<std::size_t>{0, 2}));
}

TEST(Split, SizesFollowRounding) {
  ProbeConfig c;
  auto s = split(1000, c);
  EXPECT_EQ(s.train.size(), 800u);
  EXPECT_EQ(s.test.size(), 200u);
  s = split(5, c);
  EXPECT_EQ(s.train.size(), 4u);
  EXPECT_EQ(s.test.size(), 1u);
}

TEST(Split, DisjointAndComplete) {
  ProbeConfig c;
  c.split_seed = 9;
  const auto s = split(137, c);
  std::vector<std::size_t> all = s.train;
  all.insert(all.end(), s.test.begin(), s.test.end());
  std::sort(all.begin(), all.end());
  std::vector<std::size_t> expect(137);
  std::iota(expect.begin(), expect.end(), 0);
  EXPECT_EQ(all, expect);
  EXPECT_TRUE(std::is_sorted(s.train.begin(), s.train.end()));
  EXPECT_TRUE(std::is_sorted(s.test.begin(), s.test.end()));
}

TEST(Split, Deterministic) {
  ProbeConfig c;
  c.split_seed = 2024;
  const auto a = split(500, c);
  const auto b = split(500, c);
  EXPECT_EQ(a.train, b.train);
  EXPECT_EQ(a.test, b.test);
}

TEST(Split, RejectsTooFew) {
  ProbeConfig c;
  EXPECT_ANY_THROW(split(1, c));
}
