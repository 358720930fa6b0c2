#include <gtest/gtest.h>

#include <cmath>
#include <limits>

#include "clustermax/errors.hpp"
#include "clustermax/evt.hpp"
#include "clustermax/laws.hpp"

namespace clustermax {
namespace {

TEST(ExtremeValueFamily, FrechetValues) {
  const auto g = ExtremeValueFamily::frechet(2.0);
  EXPECT_DOUBLE_EQ(g.cdf(1.0), std::exp(-1.0));
  EXPECT_DOUBLE_EQ(g.cdf(0.0), 0.0);
  EXPECT_DOUBLE_EQ(g.cdf(-3.0), 0.0);
  EXPECT_DOUBLE_EQ(g.tail_measure(2.0), 0.25);
  EXPECT_FALSE(g.in_support(0.0));
  EXPECT_THROW(g.tail_measure(0.0), DomainError);
}

TEST(ExtremeValueFamily, GumbelValues) {
  const auto g = ExtremeValueFamily::gumbel();
  EXPECT_DOUBLE_EQ(g.tail_measure(0.0), 1.0);
  EXPECT_DOUBLE_EQ(g.tail_measure(1.0), std::exp(-1.0));
  EXPECT_DOUBLE_EQ(g.cdf(0.0), std::exp(-1.0));
  EXPECT_TRUE(g.in_support(-50.0));
}

TEST(ExtremeValueFamily, WeibullHasUpperEndpointZero) {
  const auto g = ExtremeValueFamily::weibull(1.0);
  EXPECT_DOUBLE_EQ(g.cdf(0.0), 1.0);
  EXPECT_DOUBLE_EQ(g.cdf(5.0), 1.0);
  EXPECT_DOUBLE_EQ(g.tail_measure(-0.5), 0.5);
  EXPECT_DOUBLE_EQ(g.tail_measure(0.0), 0.0);
  EXPECT_DOUBLE_EQ(ExtremeValueFamily::weibull(2.0).tail_measure(-3.0), 9.0);
}

TEST(ExtremeValueFamily, RejectsBadShape) {
  EXPECT_THROW(ExtremeValueFamily::frechet(0.0), DomainError);
  EXPECT_THROW(ExtremeValueFamily::weibull(-1.0), DomainError);
  EXPECT_THROW(ExtremeValueFamily::frechet(std::nan("")), DomainError);
}

TEST(ExtremeValueFamily, QuantileInvertsCdf) {
  for (const auto& g : {ExtremeValueFamily::frechet(1.5), ExtremeValueFamily::gumbel(),
                        ExtremeValueFamily::weibull(3.0)}) {
    for (double p : {0.01, 0.2, 0.5, 0.9, 0.999}) EXPECT_NEAR(g.cdf(g.quantile(p)), p, 1e-12) << g.name();
  }
}

TEST(ExtremeValueFamily, TailMeasureIsMinusLogCdf) {
  for (const auto& g : {ExtremeValueFamily::frechet(0.7), ExtremeValueFamily::gumbel(),
                        ExtremeValueFamily::weibull(1.3)}) {
    for (double p : {0.05, 0.3, 0.7, 0.95}) {
      const double x = g.quantile(p);
      EXPECT_NEAR(g.tail_measure(x), -std::log(p), 1e-12);
    }
  }
}

// n P(X > a_n x + b_n) against mu_G(x), with the survival function written
// out independently of the library.
double oracle_tail_ratio(const MarkFamily& f, std::uint64_t n, double x) {
  const double nn = static_cast<double>(n);
  switch (f.kind) {
    case MarkFamily::Kind::Pareto: {
      const double u = std::pow(nn, 1.0 / f.parameter) * x;
      return nn * (u >= 1.0 ? std::pow(u, -f.parameter) : 1.0);
    }
    case MarkFamily::Kind::Exponential: {
      const double u = x / f.parameter + std::log(nn) / f.parameter;
      return nn * (u > 0 ? std::exp(-f.parameter * u) : 1.0);
    }
    case MarkFamily::Kind::Uniform: {
      const double u = f.parameter + f.parameter * x / nn;
      return nn * std::clamp(1.0 - u / f.parameter, 0.0, 1.0);
    }
  }
  return 0.0;
}

TEST(StandardSequences, FiniteNTailRatioEqualsTailMeasure) {
  const MarkFamily families[] = {MarkFamily::pareto(1.0), MarkFamily::pareto(2.0), MarkFamily::exponential(1.0),
                                 MarkFamily::exponential(3.0), MarkFamily::uniform(1.0), MarkFamily::uniform(4.0)};
  for (const auto& f : families) {
    const auto lim = standard_sequences(f);
    const MarkModel model(f);
    for (std::uint64_t n : {10ULL, 1000ULL, 123457ULL}) {
      for (double x : {-2.0, -0.5, 0.5, 1.0, 2.0}) {
        if (!lim.limit.in_support(x)) continue;
        const double u = lim.sequences.scale(n) * x + lim.sequences.center(n);
        const double via_model = static_cast<double>(n) * model.survival(u);
        const double target = lim.limit.tail_measure(x);
        EXPECT_NEAR(via_model, target, 1e-9 * std::max(1.0, target)) << f.name() << " n=" << n << " x=" << x;
        EXPECT_NEAR(oracle_tail_ratio(f, n, x), target, 1e-9 * std::max(1.0, target));
      }
    }
  }
}

TEST(StandardSequences, LimitFamilies) {
  EXPECT_EQ(standard_sequences(MarkFamily::pareto(2.0)).limit.kind(), EvKind::Frechet);
  EXPECT_EQ(*standard_sequences(MarkFamily::pareto(2.0)).limit.shape(), 2.0);
  EXPECT_EQ(standard_sequences(MarkFamily::exponential(1.0)).limit.kind(), EvKind::Gumbel);
  EXPECT_EQ(standard_sequences(MarkFamily::uniform(1.0)).limit.kind(), EvKind::Weibull);
}

TEST(NormalizationSequences, RejectsIndexZero) {
  const auto lim = standard_sequences(MarkFamily::pareto(1.0));
  EXPECT_THROW(lim.sequences.scale(0), DomainError);
  EXPECT_THROW(lim.sequences.center(0), DomainError);
}

TEST(AdjustedSequences, IndexIsFloorOfMeanTimesN) {
  const auto lim = standard_sequences(MarkFamily::pareto(2.0));
  const AdjustedSequences adj(lim.sequences, 1.5);
  EXPECT_EQ(adj.index(1), 1u);
  EXPECT_EQ(adj.index(3), 4u);
  EXPECT_EQ(adj.index(1000), 1500u);
  EXPECT_DOUBLE_EQ(adj.scale(1000), std::sqrt(1500.0));
  EXPECT_DOUBLE_EQ(adj.center(1000), 0.0);
}

TEST(AdjustedSequences, UnitMeanIsIdentity) {
  const auto lim = standard_sequences(MarkFamily::exponential(2.0));
  const AdjustedSequences adj(lim.sequences, 1.0);
  for (std::uint64_t n : {1ULL, 7ULL, 1000ULL}) {
    EXPECT_EQ(adj.index(n), n);
    EXPECT_DOUBLE_EQ(adj.center(n), lim.sequences.center(n));
  }
}

TEST(AdjustedSequences, RoundingNoiseInMeanDoesNotDropAnIndex) {
  // 1 / (1 - 0.8) evaluates slightly off 5.
  const double m = hawkes_mean_cluster_size(0.8);
  const AdjustedSequences adj(standard_sequences(MarkFamily::pareto(2.0)).sequences, m);
  EXPECT_EQ(adj.index(1000), 5000u);
  EXPECT_EQ(adj.index(3), 15u);
}

TEST(AdjustedSequences, RejectsInvalidMean) {
  const auto seq = standard_sequences(MarkFamily::pareto(2.0)).sequences;
  EXPECT_THROW(AdjustedSequences(seq, 0.5), DomainError);
  EXPECT_THROW(AdjustedSequences(seq, std::numeric_limits<double>::infinity()), DomainError);
  EXPECT_THROW(AdjustedSequences(seq, std::nan("")), DomainError);
}

TEST(HawkesMeanClusterSize, ClosedForm) {
  EXPECT_DOUBLE_EQ(hawkes_mean_cluster_size(0.0), 1.0);
  EXPECT_DOUBLE_EQ(hawkes_mean_cluster_size(0.5), 2.0);
  EXPECT_THROW(hawkes_mean_cluster_size(1.0), DomainError);
  EXPECT_THROW(hawkes_mean_cluster_size(-0.1), DomainError);
}

// For Frechet limits the adjustment is a pure rescaling by m^(1/alpha).
TEST(AdjustedSequences, FrechetScaleFactor) {
  const auto seq = standard_sequences(MarkFamily::pareto(2.0)).sequences;
  const AdjustedSequences adj(seq, 2.0);
  EXPECT_NEAR(adj.scale(500) / seq.scale(500), std::sqrt(2.0), 1e-12);
}

}  // namespace
}  // namespace clustermax
