#include <gtest/gtest.h>

#include <random>

#include <qnoise/noise.hpp>

using namespace qnoise;

TEST(CountDistribution, NoInjection) {
  const auto d = count_distribution({0.0, 0.0}, 0.4, 0.6, 0.1, 0.1);
  EXPECT_EQ(d.p_zero, 1.0);
  EXPECT_EQ(d.p_plus, 0.0);
  EXPECT_EQ(d.p_minus, 0.0);
}

TEST(CountDistribution, SingleParticlePartition) {
  const auto d = count_distribution({1.0, 0.0}, 0.3, 0.7, 0.2, 0.2);
  EXPECT_DOUBLE_EQ(d.p_plus, 0.3);
  EXPECT_DOUBLE_EQ(d.p_zero, 0.7);
  EXPECT_DOUBLE_EQ(d.p_minus, 0.0);
}

TEST(CountDistribution, BothInjectedSymmetric) {
  const double p = 0.15;
  const auto d = count_distribution({1.0, 1.0}, 0.5, 0.5, p, p);
  EXPECT_DOUBLE_EQ(d.p_minus, p);
  EXPECT_DOUBLE_EQ(d.p_zero, 1.0 - 2.0 * p);
  EXPECT_DOUBLE_EQ(d.p_plus, p);
}

TEST(CountDistribution, EventEnumerationOracle) {
  // independent tally over the four injection cases
  const double fa = 0.7, fb = 0.4, t = 0.35, pll = 0.1, prr = 0.05;
  double plus = 0, zero = 0, minus = 0;
  for (int ia = 0; ia < 2; ++ia)
    for (int ib = 0; ib < 2; ++ib) {
      const double w = (ia ? fa : 1 - fa) * (ib ? fb : 1 - fb);
      if (ia && ib) {
        plus += w * prr;
        minus += w * pll;
        zero += w * (1 - pll - prr);
      } else if (ia) {
        plus += w * t;
        zero += w * (1 - t);
      } else if (ib) {
        minus += w * t;
        zero += w * (1 - t);
      } else {
        zero += w;
      }
    }
  const auto d = count_distribution({fa, fb}, t, 1 - t, pll, prr);
  EXPECT_NEAR(d.p_plus, plus, 1e-15);
  EXPECT_NEAR(d.p_zero, zero, 1e-15);
  EXPECT_NEAR(d.p_minus, minus, 1e-15);
  EXPECT_NEAR(d.p_plus + d.p_zero + d.p_minus, 1.0, 1e-15);
}

TEST(CountDistribution, RejectsInvalidProbabilities) {
  EXPECT_THROW(count_distribution({1.0, 1.0}, 0.5, 0.4, 0.1, 0.1), Error);
  EXPECT_THROW(count_distribution({1.2, 1.0}, 0.5, 0.5, 0.1, 0.1), Error);
  EXPECT_THROW(count_distribution({1.0, 1.0}, -0.1, 1.1, 0.1, 0.1), Error);
  EXPECT_THROW(count_distribution({1.0, 1.0}, 0.5, 0.5, 0.7, 0.7), Error);
}

TEST(Noise, AntibunchedPairIsSilent) {
  EXPECT_EQ(noise({1.0, 1.0}, 0.6, 0.0).s, 0.0);
}

TEST(Noise, SingleParticleBracket) {
  for (double t : {0.0, 0.2, 0.5, 1.0}) EXPECT_DOUBLE_EQ(noise({1.0, 0.0}, t, 0.0).bracket, t * (1 - t));
}

TEST(Noise, DistinguishableValue) {
  const double t = 0.3, r = 0.7;
  EXPECT_NEAR(noise({1.0, 1.0}, t, r * t).bracket, 2.0 * r * t, 1e-15);
}

TEST(Noise, MonotoneInSameSideProbability) {
  double prev = -1.0;
  for (double p = 0.0; p <= 0.25; p += 0.01) {
    const double s = noise({1.0, 1.0}, 0.5, p).s;
    EXPECT_GT(s, prev);
    prev = s;
  }
}

TEST(Noise, StaysWithinBounds) {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int i = 0; i < 1000; ++i) {
    const double t = u(rng), fa = u(rng), fb = u(rng);
    const double pll = u(rng) * t * (1 - t);
    const auto rec = noise({fa, fb}, t, pll);
    EXPECT_GE(rec.s, 0.0);
    EXPECT_LE(rec.s, 1.0);
  }
}

TEST(Noise, SiScaleAndValidation) {
  const auto rec = noise({1.0, 1.0}, 0.5, 0.25);
  EXPECT_NEAR(noise_si(rec), 0.5 * 4.0 * 1.602176634e-19 * 1.602176634e-19 / 6.62607015e-34, 1e-20);
  EXPECT_THROW(noise({1.0, 1.0}, 1.5, 0.0), Error);
  EXPECT_THROW(noise({1.0, 1.0}, 0.5, -0.5), Error);
}

TEST(VarianceIdentity, Examples) {
  EXPECT_LE(variance_identity_check({1.0, 1.0}, 0.5, 0.25, 0.25), 1e-12);
  EXPECT_LE(variance_identity_check({1.0, 0.0}, 0.3, 0.0, 0.0), 1e-12);
  EXPECT_EQ(variance_identity_check({0.0, 0.0}, 0.42, 0.0, 0.0), 0.0);
}

TEST(VarianceIdentity, RandomSymmetricTuples) {
  std::mt19937_64 rng(20240229);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  double worst = 0.0;
  for (int i = 0; i < 10000; ++i) {
    const double t = u(rng), fa = u(rng), fb = u(rng);
    const double p = u(rng) * t * (1 - t);
    worst = std::max(worst, variance_identity_check({fa, fb}, t, p, p));
  }
  EXPECT_LE(worst, 1e-12);
}
