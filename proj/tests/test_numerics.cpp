#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "wldp/numerics.hpp"
#include "wldp/rng.hpp"

using namespace wldp;

TEST(Numerics, LogAddExpHandlesInfinities) {
  EXPECT_DOUBLE_EQ(numerics::log_add_exp(-kInf, 2.0), 2.0);
  EXPECT_NEAR(numerics::log_add_exp(1000.0, 1000.0), 1000.0 + std::log(2.0), 1e-12);
  const double xs[] = {-1.0, 0.0, 1.0};
  EXPECT_NEAR(numerics::log_sum_exp(xs), std::log(std::exp(-1.0) + 1.0 + std::exp(1.0)), 1e-14);
}

TEST(Numerics, AdaptiveSimpsonPolynomialAndGaussian) {
  EXPECT_NEAR(numerics::adaptive_simpson([](double x) { return x * x * x; }, 0.0, 2.0, 1e-12), 4.0, 1e-12);
  const double g = numerics::adaptive_simpson([](double x) { return std::exp(-0.5 * x * x); }, -12.0, 12.0, 1e-12);
  EXPECT_NEAR(g, std::sqrt(2.0 * std::numbers::pi), 1e-11);
}

TEST(Numerics, AdaptiveSimpsonTerminatesOnRoundingNoise) {
  // exp(large - large) integrands carry relative noise far above epsilon.
  auto f = [](double s) { return std::exp(1000.0 + 0.5 * s * s - 1000.0 - 0.5 * 900.0); };
  const double v = numerics::adaptive_simpson(f, -30.0, 30.0, 1e-13, 32);
  EXPECT_TRUE(std::isfinite(v));
}

TEST(Numerics, GoldenSectionFindsQuadraticPeak) {
  const auto r = numerics::golden_section_max([](double x) { return -(x - 0.3) * (x - 0.3); }, -1.0, 2.0);
  EXPECT_NEAR(r.arg, 0.3, 1e-9);
  const auto m = numerics::golden_section_min([](double x) { return std::cosh(x - 1.0); }, -3.0, 3.0);
  EXPECT_NEAR(m.arg, 1.0, 1e-7);  // flat minimum: sqrt(eps) resolution
  EXPECT_NEAR(m.value, 1.0, 1e-14);
}

TEST(Numerics, Linspace) {
  const auto g = numerics::linspace(0.0, 1.0, 5);
  ASSERT_EQ(g.size(), 5u);
  EXPECT_DOUBLE_EQ(g[2], 0.5);
  EXPECT_DOUBLE_EQ(g.back(), 1.0);
}

TEST(Philox, KnownAnswerZeroKeyZeroCounter) {
  Philox4x32 gen(0, 0);
  EXPECT_EQ(gen(), 0x6627e8d5u);
  EXPECT_EQ(gen(), 0xe169c58du);
  EXPECT_EQ(gen(), 0xbc57ac4cu);
  EXPECT_EQ(gen(), 0x9b00dbd8u);
}

TEST(Philox, StreamsAreIndependentAndReproducible) {
  Philox4x32 a(42, 0), b(42, 0), c(42, 1);
  bool differ = false;
  for (int i = 0; i < 16; ++i) {
    const auto x = a();
    EXPECT_EQ(x, b());
    differ = differ || x != c();
  }
  EXPECT_TRUE(differ);
  EXPECT_EQ(a.seed(), 42u);
}

TEST(Philox, UniformAndNormalMoments) {
  Philox4x32 gen(7, 3);
  double s = 0.0, s2 = 0.0, u = 0.0;
  const int n = 200000;
  for (int i = 0; i < n; ++i) {
    const double z = standard_normal(gen);
    s += z;
    s2 += z * z;
    const double v = gen.uniform();
    ASSERT_GT(v, 0.0);
    ASSERT_LT(v, 1.0);
    u += v;
  }
  EXPECT_NEAR(s / n, 0.0, 4.0 / std::sqrt(n));
  EXPECT_NEAR(s2 / n, 1.0, 4.0 * std::sqrt(2.0 / n));
  EXPECT_NEAR(u / n, 0.5, 4.0 * std::sqrt(1.0 / 12.0 / n));
}
