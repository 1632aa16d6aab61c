#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "wldp/monte_carlo.hpp"

using namespace wldp;
using namespace wldp::mc;

TEST(SampleWigner, GaussianOffDiagonalVarianceAndSymmetry) {
  const std::size_t N = 200;
  Philox4x32 gen(1, 0);
  const auto s = sample_wigner(EntryDistribution::gaussian(), N, std::nullopt, gen);
  EXPECT_EQ((s.matrix - s.matrix.transpose()).cwiseAbs().maxCoeff(), 0.0);
  double ss = 0.0;
  const double m = static_cast<double>(N * (N - 1) / 2);
  for (std::size_t j = 0; j < N; ++j)
    for (std::size_t i = 0; i < j; ++i) ss += s.matrix(i, j) * s.matrix(i, j);
  const double var = ss / m;
  // Chi-square: sd of the pooled variance estimate is sqrt(2/m) / N.
  EXPECT_NEAR(var, 1.0 / N, 3.0 * std::sqrt(2.0 / m) / N);
}

TEST(SampleWigner, TiltedGaussianMeanMatrix) {
  const std::size_t N = 200;
  Tilt tilt{1.0, std::vector<double>(N, 1.0 / std::sqrt(double(N)))};
  Eigen::MatrixXd mean = Eigen::MatrixXd::Zero(N, N);
  const int reps = 20;
  for (int r = 0; r < reps; ++r) {
    Philox4x32 gen(2, r);
    mean += sample_wigner(EntryDistribution::gaussian(), N, tilt, gen).matrix / reps;
  }
  EXPECT_NEAR(dense_top(mean).lambda, 2.0, 0.1);
}

TEST(SampleWigner, TiltedEntryMeansMatchLogLaplaceDerivative) {
  const std::size_t N = 100;
  const auto d = EntryDistribution::sparse_rademacher(0.4);
  Tilt tilt{1.0, std::vector<double>(N, 0.1)};
  Philox4x32 gen(3, 0);
  const auto s = sample_wigner(d, N, tilt, gen);
  const double t = entry_tilt(tilt, 0, 1, N);
  const double expected = d.log_laplace(t, 1) / std::sqrt(double(N));
  double sum = 0.0, sq = 0.0;
  const double m = static_cast<double>(N * (N - 1) / 2);
  for (std::size_t j = 0; j < N; ++j)
    for (std::size_t i = 0; i < j; ++i) {
      sum += s.matrix(i, j);
      sq += s.matrix(i, j) * s.matrix(i, j);
    }
  const double mean = sum / m;
  const double se = std::sqrt((sq / m - mean * mean) / m);
  EXPECT_NEAR(mean, expected, 4.0 * se);
}

TEST(SampleWigner, RejectsBadTilt) {
  Philox4x32 gen(1, 0);
  EXPECT_THROW(sample_wigner(EntryDistribution::gaussian(), 4, Tilt{1.0, {1, 1, 0, 0}}, gen), std::invalid_argument);
  EXPECT_THROW(sample_wigner(EntryDistribution::gaussian(), 4, Tilt{1.0, {1, 0}}, gen), std::invalid_argument);
  EXPECT_THROW(sample_wigner(EntryDistribution::gaussian(), 1, std::nullopt, gen), std::invalid_argument);
}

TEST(Eigen, DiagonalExample) {
  Eigen::MatrixXd H = Eigen::MatrixXd::Identity(10, 10);
  H(0, 0) = 3.0;
  const auto p = lambda1_and_vector(H);
  EXPECT_NEAR(p.lambda, 3.0, 1e-12);
  EXPECT_NEAR(std::abs(p.v(0)), 1.0, 1e-12);
}

TEST(Eigen, MatchesFullSpectrumOracle) {
  Philox4x32 gen(5, 0);
  const auto s = sample_wigner(EntryDistribution::rademacher(), 50, std::nullopt, gen);
  Eigen::EigenSolver<Eigen::MatrixXd> full(s.matrix);  // general solver as an independent oracle
  const double oracle = full.eigenvalues().real().maxCoeff();
  EXPECT_NEAR(lambda1_and_vector(s).lambda, oracle, 1e-9);
}

TEST(Eigen, LanczosAgreesWithDense) {
  Philox4x32 gen(6, 0);
  auto s = sample_wigner(EntryDistribution::gaussian(), 600, std::nullopt, gen);
  s.matrix(0, 0) += 3.0;  // separated top eigenvalue
  const auto l = lanczos_top(s.matrix);
  ASSERT_TRUE(l.has_value());
  const auto d = dense_top(s.matrix);
  EXPECT_NEAR(l->lambda, d.lambda, 1e-9);
  EXPECT_NEAR(std::abs(l->v.dot(d.v)), 1.0, 1e-8);
}

TEST(Eigen, PlantedSpikeMatchesDeformationFormula) {
  double mean = 0.0;
  for (int r = 0; r < 20; ++r) {
    Philox4x32 gen(7, r);
    auto s = sample_wigner(EntryDistribution::gaussian(), 400, std::nullopt, gen);
    s.matrix(0, 0) += 3.0;
    mean += lambda1_and_vector(s).lambda / 20.0;
  }
  EXPECT_NEAR(mean, 3.0 + 1.0 / 3.0, 0.15);
}

TEST(Localization, Examples) {
  const int N = 400;
  const auto a = eigvec_localization(Eigen::VectorXd::Constant(N, 1.0 / std::sqrt(N)), 0.1);
  EXPECT_EQ(a.mass_eta, 0.0);
  EXPECT_NEAR(a.linf, 1.0 / std::sqrt(N), 1e-15);
  EXPECT_EQ(a.support_eta, 0u);

  Eigen::VectorXd e1 = Eigen::VectorXd::Zero(N);
  e1(0) = 1.0;
  const auto b = eigvec_localization(e1, 0.1);
  EXPECT_EQ(b.mass_eta, 1.0);
  EXPECT_EQ(b.linf, 1.0);
  EXPECT_EQ(b.support_eta, 1u);

  Eigen::VectorXd v = Eigen::VectorXd::Constant(N, std::sqrt(0.5 / (N - 1)));
  v(0) = std::sqrt(0.5);
  EXPECT_NEAR(eigvec_localization(v, 0.1).mass_eta, std::sqrt(0.5), 1e-9);

  EXPECT_THROW(eigvec_localization(e1, 0.3), std::invalid_argument);
  EXPECT_THROW(eigvec_localization(2.0 * e1, 0.1), std::invalid_argument);
}

TEST(Experiment, BbpExamples) {
  ExperimentConfig cfg;
  cfg.N = 400;
  cfg.reps = 20;
  cfg.theta = 1.0;
  const auto above = experiment(cfg);
  EXPECT_GE(above.mean, 2.4);
  EXPECT_LE(above.mean, 2.6);
  ASSERT_TRUE(above.prediction && above.prediction->value);
  EXPECT_DOUBLE_EQ(*above.prediction->value, 2.5);

  cfg.theta = 0.3;
  const auto below = experiment(cfg);
  EXPECT_GE(below.mean, 1.9);
  EXPECT_LE(below.mean, 2.1);
  EXPECT_FALSE(below.prediction->value.has_value());
}

TEST(Experiment, LocalizationConditionalExceedsUnconditional) {
  ExperimentConfig cfg;
  cfg.kind = Kind::Localization;
  cfg.dist = EntryDistribution::sparse_gaussian(0.5);
  cfg.N = 300;
  cfg.reps = 2000;
  cfg.selection = 0.01;
  cfg.eta = 0.1;
  cfg.seed = 11;
  const auto r = experiment(cfg);
  ASSERT_TRUE(r.conditional);
  EXPECT_EQ(r.conditional->selected, 20u);
  EXPECT_GT(r.conditional->linf_conditional, r.conditional->linf_unconditional);
}

TEST(Experiment, TailUnreachableIsStructured) {
  ExperimentConfig cfg;
  cfg.kind = Kind::Tail;
  cfg.N = 100;
  cfg.reps = 20;
  cfg.x = 3.0;
  const auto r = experiment(cfg);
  ASSERT_TRUE(r.tail);
  EXPECT_EQ(r.tail->status, "insufficient reps");
  EXPECT_EQ(r.tail->count, 0u);
  EXPECT_EQ(r.tail->wilson_lo, 0.0);
  EXPECT_GT(r.tail->wilson_hi, 0.0);
}

TEST(Experiment, TailReachable) {
  ExperimentConfig cfg;
  cfg.kind = Kind::Tail;
  cfg.N = 50;
  cfg.reps = 40;
  cfg.x = 1.8;
  const auto r = experiment(cfg);
  EXPECT_EQ(r.tail->status, "ok");
  EXPECT_NEAR(r.tail->rate_estimate, -std::log(r.tail->frequency) / 50.0, 1e-15);
}

TEST(Experiment, ReplayIsBitIdenticalAcrossThreads) {
  ExperimentConfig cfg;
  cfg.N = 60;
  cfg.reps = 12;
  cfg.seed = 99;
  cfg.dist = EntryDistribution::sparse_rademacher(0.3);
  const auto a = experiment(cfg);
  cfg.threads = 3;
  const auto b = experiment(cfg);
  EXPECT_EQ(a.lambda1, b.lambda1);
  EXPECT_EQ(a.mean, b.mean);
  cfg.seed = 100;
  EXPECT_NE(experiment(cfg).lambda1, a.lambda1);
}

TEST(Experiment, Validation) {
  ExperimentConfig cfg;
  cfg.theta = 1.0;
  cfg.spike = 2.0;
  EXPECT_THROW(experiment(cfg), std::invalid_argument);
  cfg = {};
  cfg.eta = 0.3;
  EXPECT_THROW(experiment(cfg), std::invalid_argument);
}

TEST(Wilson, KnownValue) {
  const auto [lo, hi] = wilson_interval(5, 100);
  EXPECT_NEAR(lo, 0.02154, 1e-4);
  EXPECT_NEAR(hi, 0.11175, 1e-4);
}
