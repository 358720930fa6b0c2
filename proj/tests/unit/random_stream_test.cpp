#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <set>
#include <vector>

#include "clustermax/random_stream.hpp"
#include "clustermax/stats.hpp"

namespace clustermax {
namespace {

// Known-answer vectors published with Random123.
TEST(Philox, ZeroCounterZeroKey) {
  const auto out = philox4x64({0, 0, 0, 0}, {0, 0});
  EXPECT_EQ(out[0], 0x16554d9eca36314cULL);
  EXPECT_EQ(out[1], 0xdb20fe9d672d0fdcULL);
  EXPECT_EQ(out[2], 0xd7e772cee186176bULL);
  EXPECT_EQ(out[3], 0x7e68b68aec7ba23bULL);
}

TEST(Philox, AllOnes) {
  const auto out = philox4x64({~0ULL, ~0ULL, ~0ULL, ~0ULL}, {~0ULL, ~0ULL});
  EXPECT_EQ(out[0], 0x87b092c3013fe90bULL);
  EXPECT_EQ(out[1], 0x438c3c67be8d0224ULL);
  EXPECT_EQ(out[2], 0x9cc7d7c69cd777b6ULL);
  EXPECT_EQ(out[3], 0xa09caebf594f0ba0ULL);
}

TEST(Philox, DigitsOfPi) {
  const auto out = philox4x64({0x243f6a8885a308d3ULL, 0x13198a2e03707344ULL, 0xa4093822299f31d0ULL, 0x082efa98ec4e6c89ULL},
                              {0x452821e638d01377ULL, 0xbe5466cf34e90c6cULL});
  EXPECT_EQ(out[0], 0xa528f45403e61d95ULL);
  EXPECT_EQ(out[1], 0x38c72dbd566e9788ULL);
  EXPECT_EQ(out[2], 0xa5a1610e72fd18b5ULL);
  EXPECT_EQ(out[3], 0x57bd43b5e52b7fe6ULL);
}

TEST(RandomStream, SameTripleGivesSameDraws) {
  RandomStream a = derive_stream(77, 5, 2);
  RandomStream b = derive_stream(77, 5, 2);
  for (int i = 0; i < 10'000; ++i) ASSERT_EQ(a(), b());
}

TEST(RandomStream, FirstWordsDifferAcrossReplications) {
  std::set<std::uint64_t> seen;
  for (std::uint64_t r = 0; r < 1000; ++r) {
    RandomStream a = derive_stream(9, r, 0);
    RandomStream b = derive_stream(9, r + 1, 0);
    const std::uint64_t first = a();
    EXPECT_NE(first, b());
    seen.insert(first);
  }
  EXPECT_EQ(seen.size(), 1000u);
}

TEST(RandomStream, StreamIdsSeparateEveryField) {
  const std::uint64_t base = RandomStream(StreamId{1, 2, 3, 4})();
  EXPECT_NE(base, RandomStream(StreamId{2, 2, 3, 4})());
  EXPECT_NE(base, RandomStream(StreamId{1, 3, 3, 4})());
  EXPECT_NE(base, RandomStream(StreamId{1, 2, 4, 4})());
  EXPECT_NE(base, RandomStream(StreamId{1, 2, 3, 5})());
}

TEST(RandomStream, SubstreamKeepsParentFields) {
  const RandomStream parent = derive_stream(3, 4, 5);
  const RandomStream child = parent.substream(6);
  EXPECT_EQ(child.id(), (StreamId{3, 4, 5, 6}));
}

TEST(RandomStream, FirstDrawsOverDistinctTriplesAreUniform) {
  std::vector<double> u;
  u.reserve(10'000);
  for (std::uint64_t r = 0; r < 100; ++r) {
    for (std::uint64_t h = 0; h < 100; ++h) u.push_back(derive_stream(2024, r, h).uniform());
  }
  const auto report = stats::ks_one_sample(stats::EmpiricalDistribution(u), [](double x) {
    return std::clamp(x, 0.0, 1.0);
  });
  EXPECT_TRUE(report.pass) << report.statistic << " vs " << report.critical;
}

TEST(RandomStream, UniformStaysInOpenInterval) {
  RandomStream rng(1, 0, 0);
  for (int i = 0; i < 100'000; ++i) {
    const double u = rng.uniform();
    ASSERT_GT(u, 0.0);
    ASSERT_LT(u, 1.0);
  }
}

TEST(RandomStream, ExponentialAndPoissonMeans) {
  RandomStream rng(5, 0, 0);
  constexpr int kDraws = 200'000;
  double e = 0.0;
  double p = 0.0;
  for (int i = 0; i < kDraws; ++i) {
    e += rng.exponential(2.0);
    p += static_cast<double>(rng.poisson(3.0));
  }
  // 5 standard errors.
  EXPECT_NEAR(e / kDraws, 0.5, 5 * 0.5 / std::sqrt(kDraws));
  EXPECT_NEAR(p / kDraws, 3.0, 5 * std::sqrt(3.0 / kDraws));
  EXPECT_EQ(rng.poisson(0.0), 0u);
}

TEST(RandomStream, GeometricTrials) {
  RandomStream rng(6, 0, 0);
  EXPECT_EQ(rng.geometric_trials(1.0), 1u);
  EXPECT_EQ(rng.geometric_trials(0.0), std::numeric_limits<std::uint64_t>::max());
  constexpr int kDraws = 200'000;
  double sum = 0.0;
  for (int i = 0; i < kDraws; ++i) sum += static_cast<double>(rng.geometric_trials(0.25));
  // mean 4, variance (1 - p) / p^2 = 12
  EXPECT_NEAR(sum / kDraws, 4.0, 5 * std::sqrt(12.0 / kDraws));
}

TEST(RandomStream, BlocksAdvanceEveryFourWords) {
  RandomStream rng(1, 0, 0);
  EXPECT_EQ(rng.blocks_consumed(), 0u);
  for (int i = 0; i < 4; ++i) rng();
  EXPECT_EQ(rng.blocks_consumed(), 1u);
  rng();
  EXPECT_EQ(rng.blocks_consumed(), 2u);
}

}  // namespace
}  // namespace clustermax
