#include "vcate/design.h"

#include <cmath>
#include <vector>

#include <gtest/gtest.h>

#include "vcate/errors.h"

namespace vcate {
namespace {

TEST(DesignTest, WeightsDecayGeometricallyAndSumToOne) {
  SimulationDesign d;
  const Eigen::VectorXd w = d.SquaredWeights();
  EXPECT_NEAR(w.sum(), 1.0, 1e-15);
  for (int j = 1; j < d.J; ++j) EXPECT_NEAR(w[j] / w[j - 1], d.decay, 1e-14);
  EXPECT_NEAR(d.Direction().squaredNorm(), 1.0, 1e-15);
}

TEST(DesignTest, SampleMomentsMatchTheDesign) {
  SimulationDesign d;
  d.v_tau = 0.5;
  d.n = 200000;
  const SimulatedSample s = GenSample(d, 3);
  const Eigen::VectorXd tau = s.y1 - s.y0;
  Eigen::VectorXd cate(d.n);
  for (int i = 0; i < d.n; ++i) cate[i] = OracleTau(d, s.data.x.row(i));
  const double mean = cate.mean();
  EXPECT_NEAR((cate.array() - mean).square().mean(), d.v_tau, 0.01);
  EXPECT_NEAR(mean, d.tau, 0.01);
  const double y0_mean = s.y0.mean();
  EXPECT_NEAR((s.y0.array() - y0_mean).square().mean(), 1.0, 0.02);
  const double corr = s.data.x.col(0).dot(s.data.x.col(d.J)) / d.n;
  EXPECT_NEAR(corr, d.rho, 0.01);
  double treated = 0.0;
  for (int v : s.data.d) treated += v;
  EXPECT_NEAR(treated / d.n, 0.5, 0.01);
  EXPECT_GT(tau.size(), 0);
}

TEST(DesignTest, ConditionalVarianceMatchesNoiseModel) {
  SimulationDesign d;
  d.n = 100000;
  const SimulatedSample s = GenSample(d, 8);
  double sum = 0.0;
  for (int i = 0; i < d.n; ++i) sum += OracleSigma2(d, 0, s.data.x.row(i));
  EXPECT_NEAR(sum / d.n, d.sigma2, 0.01);
}

TEST(DesignTest, GenSampleIsDeterministic) {
  SimulationDesign d;
  d.n = 50;
  const SimulatedSample a = GenSample(d, 99), b = GenSample(d, 99), c = GenSample(d, 100);
  EXPECT_EQ(a.data.y, b.data.y);
  EXPECT_EQ(a.data.x, b.data.x);
  EXPECT_NE(a.data.y, c.data.y);
}

TEST(DesignTest, ConditionalVcateIsMonotoneAndExactOnFullSet) {
  SimulationDesign d;
  d.v_tau = 1.0;
  std::vector<int> all(d.p());
  for (int j = 0; j < d.p(); ++j) all[j] = j;
  EXPECT_NEAR(OracleVcateForCovariates(d, all), 1.0, 1e-12);
  const std::vector<int> x0 = {0, 1, 2, 3, 4};
  EXPECT_NEAR(OracleVcateForCovariates(d, x0), d.rho * d.rho, 1e-12);
  const std::vector<int> one = {5}, two = {5, 6};
  EXPECT_LE(OracleVcateForCovariates(d, one), OracleVcateForCovariates(d, two));
  EXPECT_EQ(OracleVcateForCovariates(d, {}), 0.0);
}

TEST(DesignTest, ValidateRejectsBadDesigns) {
  SimulationDesign d;
  d.rho = 1.0;
  EXPECT_THROW(d.Validate(), Error);
  d = SimulationDesign();
  d.sigma_tilde2 = 2.0;
  EXPECT_THROW(d.Validate(), Error);
  d = SimulationDesign();
  d.n = 3;
  EXPECT_THROW(d.Validate(), Error);
}

}  // namespace
}  // namespace vcate
