#include <gtest/gtest.h>

#include <cmath>
#include <set>

#include "regionboot/rng.hpp"

using namespace regionboot;

TEST(Philox, KnownAnswerZero) {
  const auto r = philox4x32_10({0, 0, 0, 0}, {0, 0});
  EXPECT_EQ(r[0], 0x6627e8d5u);
  EXPECT_EQ(r[1], 0xe169c58du);
  EXPECT_EQ(r[2], 0xbc57ac4cu);
  EXPECT_EQ(r[3], 0x9b00dbd8u);
}

TEST(Philox, KnownAnswerOnes) {
  const auto r = philox4x32_10({0xffffffffu, 0xffffffffu, 0xffffffffu, 0xffffffffu}, {0xffffffffu, 0xffffffffu});
  EXPECT_EQ(r[0], 0x408f276du);
  EXPECT_EQ(r[1], 0x41c83b0eu);
  EXPECT_EQ(r[2], 0xa20bc7c6u);
  EXPECT_EQ(r[3], 0x6d5451fdu);
}

TEST(Philox, KnownAnswerPi) {
  const auto r = philox4x32_10({0x243f6a88u, 0x85a308d3u, 0x13198a2eu, 0x03707344u}, {0xa4093822u, 0x299f31d0u});
  EXPECT_EQ(r[0], 0xd16cfe09u);
  EXPECT_EQ(r[1], 0x94fdccebu);
  EXPECT_EQ(r[2], 0x5001e420u);
  EXPECT_EQ(r[3], 0x24126ea1u);
}

TEST(NormalStream, SameAddressSameDraws) {
  NormalStream a(42, 3, 7), b(42, 3, 7);
  for (int i = 0; i < 1000; ++i) ASSERT_EQ(a.next(), b.next());
}

TEST(NormalStream, DistinctStreamsChunksSeedsDiffer) {
  NormalStream base(1, 0, 0), s(1, 1, 0), c(1, 0, 1), k(2, 0, 0);
  const double x = base.next();
  EXPECT_NE(x, s.next());
  EXPECT_NE(x, c.next());
  EXPECT_NE(x, k.next());
}

TEST(NormalStream, MomentsMatchStandardNormal) {
  NormalStream g(2024, 0, 0);
  const int n = 400000;
  double m1 = 0, m2 = 0, m4 = 0;
  int tail = 0;
  for (int i = 0; i < n; ++i) {
    const double x = g.next();
    m1 += x;
    m2 += x * x;
    m4 += x * x * x * x;
    tail += x > 1.6448536269514722;
  }
  m1 /= n;
  m2 /= n;
  m4 /= n;
  EXPECT_NEAR(m1, 0.0, 4.0 / std::sqrt(n));
  EXPECT_NEAR(m2, 1.0, 4.0 * std::sqrt(2.0 / n));
  EXPECT_NEAR(m4, 3.0, 4.0 * std::sqrt(96.0 / n));
  EXPECT_NEAR(static_cast<double>(tail) / n, 0.05, 4.0 * std::sqrt(0.05 * 0.95 / n));
}

TEST(SplitMix, Bijective) {
  std::set<std::uint64_t> seen;
  for (std::uint64_t i = 0; i < 1000; ++i) seen.insert(splitmix64(i));
  EXPECT_EQ(seen.size(), 1000u);
}
