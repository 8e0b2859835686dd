#include <gtest/gtest.h>

#include <array>
#include <cmath>
#include <set>

#include "uaweight/random.hpp"

using namespace uaweight;

TEST(Random, UniformIndexStaysInRangeAndCoversIt) {
  Rng rng(7);
  std::array<int, 7> counts{};
  for (int i = 0; i < 70000; ++i) {
    const auto v = uniform_index(rng, 7);
    ASSERT_LT(v, 7u);
    ++counts[v];
  }
  for (int c : counts) EXPECT_NEAR(c, 10000, 400);
}

TEST(Random, UniformIndexOfOneIsZero) {
  Rng rng(1);
  for (int i = 0; i < 100; ++i) EXPECT_EQ(uniform_index(rng, 1), 0u);
}

TEST(Random, Uniform01IsHalfOpen) {
  Rng rng(3);
  double sum = 0.0;
  for (int i = 0; i < 100000; ++i) {
    const double u = uniform01(rng);
    ASSERT_GE(u, 0.0);
    ASSERT_LT(u, 1.0);
    sum += u;
  }
  EXPECT_NEAR(sum / 100000, 0.5, 0.005);
}

TEST(Random, StandardNormalMoments) {
  Rng rng(11);
  const int n = 200000;
  double s = 0.0, s2 = 0.0;
  for (int i = 0; i < n; ++i) {
    const double z = standard_normal(rng);
    ASSERT_TRUE(std::isfinite(z));
    s += z;
    s2 += z * z;
  }
  EXPECT_NEAR(s / n, 0.0, 0.01);
  EXPECT_NEAR(s2 / n, 1.0, 0.015);
}

TEST(Random, BernoulliFrequencyAndEdges) {
  Rng rng(5);
  int hits = 0;
  for (int i = 0; i < 100000; ++i) hits += bernoulli(rng, 0.3) ? 1 : 0;
  EXPECT_NEAR(hits / 100000.0, 0.3, 0.005);
  for (int i = 0; i < 1000; ++i) {
    EXPECT_FALSE(bernoulli(rng, 0.0));
    EXPECT_TRUE(bernoulli(rng, 1.0));
  }
}

TEST(Random, SameSeedSameStream) {
  Rng a(42), b(42);
  for (int i = 0; i < 100; ++i) {
    EXPECT_EQ(uniform_index(a, 1000), uniform_index(b, 1000));
    EXPECT_EQ(standard_normal(a), standard_normal(b));
  }
}

// Pins the generator so seeded artifacts cannot drift silently.
TEST(Random, Mt19937_64TenThousandthOutput) {
  Rng rng;  // default seed 5489
  rng.discard(9999);
  EXPECT_EQ(rng(), 9981545732273789042ULL);
}

TEST(Random, DeriveSeedSeparatesOrdinals) {
  std::set<std::uint64_t> seen;
  for (std::uint64_t i = 0; i < 1000; ++i) seen.insert(derive_seed(1, i));
  EXPECT_EQ(seen.size(), 1000u);
  EXPECT_EQ(derive_seed(9, 4), derive_seed(9, 4));
  EXPECT_NE(derive_seed(1, 2), derive_seed(2, 1) + 1);
}
