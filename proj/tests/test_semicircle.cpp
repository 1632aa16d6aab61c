#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "wldp/numerics.hpp"
#include "wldp/rng.hpp"
#include "wldp/semicircle.hpp"

using namespace wldp;
using namespace wldp::semicircle;

namespace {

// Closed form of the log-potential outside the bulk, with m = G(x) = 2 theta_-.
double log_potential_oracle(double x) {
  const double m = 0.5 * (x - std::sqrt(x * x - 4.0));
  return -std::log(m) + 0.5 * m * m;
}

double goe_rate_quadrature(double x) {
  return 0.5 * numerics::adaptive_simpson([](double y) { return std::sqrt(std::max(0.0, y * y - 4.0)); }, 2.0, x,
                                          1e-13, 64);
}

}  // namespace

TEST(Semicircle, ThetaRootsExamples) {
  const auto e = theta_roots(2.0);
  EXPECT_DOUBLE_EQ(e.theta_minus, 0.5);
  EXPECT_DOUBLE_EQ(e.theta_plus, 0.5);
  const auto p = theta_roots(2.5);
  EXPECT_NEAR(p.theta_minus, 0.25, 1e-15);
  EXPECT_NEAR(p.theta_plus, 1.0, 1e-15);
  EXPECT_THROW(theta_roots(1.9), std::domain_error);
}

TEST(Semicircle, RootsSolveTheEquationAndMultiplyToQuarter) {
  Philox4x32 gen(3, 0);
  for (int i = 0; i < 100; ++i) {
    const double x = 2.0 + 8.0 * gen.uniform();
    const auto r = theta_roots(x);
    EXPECT_NEAR(r.theta_minus * r.theta_plus, 0.25, 1e-12);
    EXPECT_NEAR(2 * r.theta_minus + 0.5 / r.theta_minus, x, 1e-12 * x);
    EXPECT_NEAR(2 * r.theta_plus + 0.5 / r.theta_plus, x, 1e-12 * x);
    EXPECT_LE(r.theta_minus, 0.5);
    EXPECT_GE(r.theta_plus, 0.5);
  }
}

TEST(Semicircle, LogPotentialValues) {
  EXPECT_NEAR(log_potential(2.0), 0.5, 1e-10);
  EXPECT_NEAR(log_potential(1e6), std::log(1e6), 1e-6);
  for (double x : {2.001, 2.3, 3.0, 5.0, 40.0}) EXPECT_NEAR(log_potential(x), log_potential_oracle(x), 1e-10) << x;
  EXPECT_THROW(log_potential(1.5), std::domain_error);
}

TEST(Semicircle, LogPotentialDerivativeIsStieltjes) {
  const double h = 1e-5;
  const double fd = (log_potential(3.0 + h) - log_potential(3.0 - h)) / (2 * h);
  EXPECT_NEAR(fd, theta_roots(3.0).stieltjes(), 1e-6);
}

TEST(Semicircle, GoeRateValues) {
  EXPECT_EQ(goe_rate(2.0), 0.0);
  EXPECT_NEAR(goe_rate(3.0), 0.71463, 1e-5);
  EXPECT_EQ(goe_rate(1.0), kInf);
  for (double x : {2.2, 3.0, 4.5, 9.0}) EXPECT_NEAR(goe_rate(x), goe_rate_quadrature(x), 1e-9) << x;
}

TEST(Semicircle, GoeRateMonotoneAndConvex) {
  const double h = 0.01;
  for (double x = 2.0 + h; x < 10.0 - h; x += h) {
    EXPECT_GE(goe_rate(x + h), goe_rate(x));
    EXPECT_GE(goe_rate(x + h) - 2 * goe_rate(x) + goe_rate(x - h), -1e-8) << x;
  }
}

TEST(Semicircle, JValueBranches) {
  EXPECT_NEAR(j_value(3.0, 0.15), 0.0225, 1e-15);
  const auto r = theta_roots(3.0);
  const double L = log_potential(3.0);
  const double log_branch = r.theta_minus * 3.0 - 0.5 * L - 0.5 * std::log(2 * r.theta_minus) - 0.5;
  EXPECT_NEAR(log_branch, r.theta_minus * r.theta_minus, 1e-9);
  EXPECT_NEAR(j_value(3.0, r.theta_minus), r.theta_minus * r.theta_minus, 1e-15);
  EXPECT_THROW(j_value(3.0, -0.1), std::domain_error);
}

TEST(Semicircle, JValueContinuouslyDifferentiableAtThetaMinus) {
  for (double x : {2.2, 3.0, 6.0}) {
    const Site s(x);
    const double tm = s.point.theta_minus, h = 1e-6;
    const double left = (s.j(tm) - s.j(tm - h)) / h;
    const double right = (s.j(tm + h) - s.j(tm)) / h;
    EXPECT_NEAR(left, right, 1e-4) << x;
  }
}

TEST(Semicircle, OverlapValues) {
  const auto r = theta_roots(3.0);
  EXPECT_EQ(overlap(3.0, r.theta_minus), 0.0);
  EXPECT_NEAR(overlap(2.5, 1.0), std::sqrt(0.75), 1e-15);
  EXPECT_NEAR(overlap(3.0, 1e6), 1.0, 1e-6);
  EXPECT_EQ(overlap(3.0, 0.0), 0.0);
}

TEST(Semicircle, OverlapIdentityAndMonotonicity) {
  const Site s(3.7);
  double prev = 0.0;
  for (double th = s.point.theta_minus; th < 10.0; th += 0.013) {
    const double q = s.q(th);
    EXPECT_NEAR(q * q * th, th - s.point.theta_minus, 1e-14);
    EXPECT_GE(q, prev);
    prev = q;
  }
}
