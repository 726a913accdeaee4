#include "vcate/multistep.h"

#include <cmath>
#include <random>
#include <type_traits>
#include <vector>

#include <gtest/gtest.h>

#include "test_util.h"
#include "vcate/dml_twostep.h"
#include "vcate/errors.h"

namespace vcate {
namespace {

FoldRegressors OlsRegressors(const Dataset& ds, int k, std::uint64_t seed, NuisanceModel* model = nullptr) {
  const FoldPlan plan = MakeFolds(ds.n(), 2, seed);
  NuisanceOptions opt;
  opt.method = NuisanceMethod::kOls;
  const NuisanceModel m = FitNuisance(ds, plan, k, opt);
  if (model != nullptr) *model = m;
  return BuildRegressors(ds, plan, k, m);
}

// Sandwich J^-1 H J^-1 for theta on the original regressor scale.
Eigen::Matrix2d DenseSandwichOmega(const FoldRegressors& reg, const Eigen::Vector4d& theta) {
  const double n = static_cast<double>(reg.n());
  Eigen::Matrix4d j = Eigen::Matrix4d::Zero(), h = Eigen::Matrix4d::Zero();
  const Eigen::VectorXd u = reg.y - reg.w * theta;
  for (Eigen::Index i = 0; i < reg.n(); ++i) {
    const Eigen::Vector4d w = reg.w.row(i).transpose();
    j += reg.lambda[i] * w * w.transpose() / n;
    h += reg.lambda[i] * reg.lambda[i] * u[i] * u[i] * w * w.transpose() / n;
  }
  const Eigen::Matrix4d jinv = j.inverse();
  const Eigen::Matrix4d sandwich = jinv * h * jinv;
  Eigen::Matrix2d out;
  out(0, 0) = reg.v_x * sandwich(3, 3);
  double cross = 0.0, t2 = 0.0;
  for (Eigen::Index i = 0; i < reg.n(); ++i) {
    const double infl = std::sqrt(reg.v_x) * (jinv.row(3) * reg.w.row(i).transpose())(0) *
                        reg.lambda[i] * u[i];
    const double t = reg.s[i] * reg.s[i] / reg.v_x - 1.0;
    cross += infl * t / n;
    t2 += t * t / n;
  }
  out(0, 1) = out(1, 0) = cross;
  out(1, 1) = t2;
  return out;
}

TEST(MultistepTest, RegressorsFollowTheirDefinition) {
  Dataset ds = testing::LinearExperiment(200, 3, 0.4, 2, 0.3);
  NuisanceModel model;
  const FoldRegressors reg = OlsRegressors(ds, 1, 4, &model);
  const FoldPlan plan = MakeFolds(ds.n(), 2, 4);
  ASSERT_EQ(reg.n(), static_cast<Eigen::Index>(plan.fold_size(1)));
  EXPECT_NEAR(reg.s.mean(), 0.0, 1e-14);
  EXPECT_NEAR(reg.v_x, reg.s.squaredNorm() / reg.n(), 1e-15);
  for (Eigen::Index r = 0; r < reg.n(); ++r) {
    const std::size_t i = plan.members[1][r];
    const auto x = ds.x.row(i);
    const double dev = ds.d[i] - 0.3;
    EXPECT_DOUBLE_EQ(reg.w(r, 0), 1.0);
    EXPECT_NEAR(reg.w(r, 1), model.PredictMu0(x) + 0.3 * model.PredictTau(x), 1e-13);
    EXPECT_DOUBLE_EQ(reg.w(r, 2), dev);
    EXPECT_NEAR(reg.w(r, 3), dev * (model.PredictTau(x) - reg.tau_bar), 1e-13);
    EXPECT_NEAR(reg.lambda[r], 1.0 / 0.21, 1e-12);
  }
}

TEST(MultistepTest, WlsMatchesDenseNormalEquations) {
  const Dataset ds = testing::LinearExperiment(500, 4, 0.3, 7, 0.4);
  const FoldRegressors reg = OlsRegressors(ds, 0, 1);
  const Eigen::Vector4d theta = WlsTheta(reg.w, reg.lambda, reg.y);
  const Eigen::Matrix4d gram = reg.w.transpose() * reg.lambda.asDiagonal() * reg.w;
  const Eigen::Vector4d rhs = reg.w.transpose() * reg.lambda.asDiagonal() * reg.y;
  const Eigen::Vector4d dense = gram.partialPivLu().solve(rhs);
  EXPECT_LT((theta - dense).cwiseAbs().maxCoeff(), 1e-9);
}

TEST(MultistepTest, ExactLinearOutcomeIsRecovered) {
  // Six units with y an exact linear function of the generated regressors.
  FoldRegressors reg;
  const std::vector<double> tau = {0.1, 0.5, -0.2, 0.4, 0.0, 0.3};
  const std::vector<double> mu0 = {1.0, 0.2, -0.5, 0.7, 0.3, -0.1};
  const std::vector<int> d = {1, 0, 1, 1, 0, 0};
  const int n = 6;
  reg.w.resize(n, 4);
  reg.lambda = Eigen::VectorXd::Constant(n, 4.0);
  reg.y.resize(n);
  reg.s.resize(n);
  double tau_bar = 0.0;
  for (double t : tau) tau_bar += t / n;
  double v_x = 0.0;
  for (int i = 0; i < n; ++i) {
    reg.s[i] = tau[i] - tau_bar;
    v_x += reg.s[i] * reg.s[i] / n;
    reg.w.row(i) << 1.0, mu0[i] + 0.5 * tau[i], d[i] - 0.5, (d[i] - 0.5) * reg.s[i];
    reg.y[i] = 1.0 + 2.0 * reg.w(i, 1) + 0.5 * reg.w(i, 2) + 3.0 * reg.w(i, 3);
  }
  const Eigen::Vector4d theta = WlsTheta(reg.w, reg.lambda, reg.y);
  EXPECT_NEAR(theta[0], 1.0, 1e-12);
  EXPECT_NEAR(theta[1], 2.0, 1e-12);
  EXPECT_NEAR(theta[2], 0.5, 1e-12);
  EXPECT_NEAR(theta[3], 3.0, 1e-12);
  reg.v_x = v_x;
  reg.pscore = Eigen::VectorXd::Constant(n, 0.5);
  reg.d = d;
  reg.tau_hat = Eigen::Map<const Eigen::VectorXd>(tau.data(), n);
  reg.mu0_hat = Eigen::Map<const Eigen::VectorXd>(mu0.data(), n);
  reg.tau_bar = tau_bar;
  const FoldEstimate fe = EstimateFold(reg, 0, 0);
  EXPECT_NEAR(fe.v_tau, 9.0 * v_x, 1e-12);
  EXPECT_LT(InfluenceIdentityCheck(reg, fe), 1e-12);
}

TEST(MultistepTest, SingularDesignIsRejected) {
  Eigen::MatrixXd w(5, 4);
  w << 1, 1, 0.5, 0, 1, 2, -0.5, 0, 1, 3, 0.5, 0, 1, 4, -0.5, 0, 1, 5, 0.5, 0;
  EXPECT_THROW(WlsTheta(w, Eigen::VectorXd::Ones(5), Eigen::VectorXd::Ones(5)), Error);
  w.col(3) = w.col(1) * 2.0;
  try {
    WlsTheta(w, Eigen::VectorXd::Ones(5), Eigen::VectorXd::Ones(5));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kSingularGram);
  }
}

TEST(MultistepTest, SandwichMatchesDenseFormula) {
  for (std::uint64_t seed : {1u, 2u, 3u}) {
    const Dataset ds = testing::LinearExperiment(400, 3, 0.5, seed, 0.35);
    const FoldRegressors reg = OlsRegressors(ds, 0, seed);
    const Eigen::Vector4d theta = WlsTheta(reg.w, reg.lambda, reg.y);
    const Eigen::Matrix2d omega = SandwichOmega(reg, theta);
    const Eigen::Matrix2d dense = DenseSandwichOmega(reg, theta);
    EXPECT_LT((omega - dense).cwiseAbs().maxCoeff(), 1e-9 * dense.cwiseAbs().maxCoeff());
  }
}

TEST(MultistepTest, DuplicatedClustersDoubleTheCovariance) {
  const Dataset ds = testing::LinearExperiment(300, 3, 0.5, 21);
  const FoldRegressors reg = OlsRegressors(ds, 0, 3);
  const Eigen::Vector4d theta = WlsTheta(reg.w, reg.lambda, reg.y);
  const Eigen::Matrix2d iid = SandwichOmega(reg, theta);

  FoldRegressors twice = reg;
  const Eigen::Index n = reg.n();
  auto stack = [](const auto& v) {
    std::decay_t<decltype(v)> out(2 * v.rows(), v.cols());
    out << v, v;
    return out;
  };
  twice.w = stack(reg.w);
  twice.lambda = stack(reg.lambda);
  twice.y = stack(reg.y);
  twice.s = stack(reg.s);
  std::vector<std::int64_t> cid(2 * n);
  for (Eigen::Index i = 0; i < n; ++i) cid[i] = cid[n + i] = i;
  const Eigen::Vector4d theta2 = WlsTheta(twice.w, twice.lambda, twice.y);
  EXPECT_LT((theta2 - theta).cwiseAbs().maxCoeff(), 1e-10);
  const Eigen::Matrix2d clustered = ClusteredOmega(twice, theta2, cid);
  EXPECT_LT((clustered - 2.0 * iid).cwiseAbs().maxCoeff(), 1e-9 * iid.cwiseAbs().maxCoeff());

  std::vector<std::int64_t> singletons(n);
  for (Eigen::Index i = 0; i < n; ++i) singletons[i] = 1000 + i;
  EXPECT_LT((ClusteredOmega(reg, theta, singletons) - iid).cwiseAbs().maxCoeff(), 1e-12);
  const std::vector<std::int64_t> one(n, 5);
  EXPECT_THROW(ClusteredOmega(reg, theta, one), Error);
}

TEST(MultistepTest, InfluenceIdentityHoldsOnRandomFolds) {
  std::mt19937_64 rng(5);
  for (int rep = 0; rep < 40; ++rep) {
    const int n = 60 + static_cast<int>(rng() % 400);
    const double slope = 0.1 * static_cast<double>(rng() % 10);
    const double pscore = 0.2 + 0.1 * static_cast<double>(rng() % 6);
    const Dataset ds = testing::LinearExperiment(n, 3, slope, rng(), pscore);
    const FoldRegressors reg = OlsRegressors(ds, static_cast<int>(rng() % 2), rng());
    const FoldEstimate fe = EstimateFold(reg, 0, 0);
    ASSERT_FALSE(fe.degenerate);
    EXPECT_LE(InfluenceIdentityCheck(reg, fe), 1e-8 * std::max(1.0, fe.v_tau));
  }
}

TEST(MultistepTest, DegenerateFirstStageGivesDegenerateFold) {
  const Dataset ds = testing::LinearExperiment(100, 2, 0.3, 3);
  const FoldPlan plan = MakeFolds(ds.n(), 2, 1);
  NuisanceModel model;
  model.mu0.coefficients = Eigen::VectorXd::Zero(2);
  model.mu1 = model.mu0;
  model.mu1.intercept = 0.4;
  const FoldEstimate fe = EstimateFold(ds, plan, 0, model);
  EXPECT_TRUE(fe.degenerate);
  EXPECT_EQ(fe.v_tau, 0.0);
  EXPECT_DOUBLE_EQ(fe.tau_bar, 0.4);
}

TEST(MultistepTest, ClusterIdsSwitchToClusteredCovariance) {
  Dataset ds = testing::LinearExperiment(400, 3, 0.4, 8);
  std::vector<std::int64_t> cid(ds.n());
  for (std::size_t i = 0; i < ds.n(); ++i) cid[i] = static_cast<std::int64_t>(i / 4);
  ds.cluster_id = cid;
  const FoldPlan plan = MakeFolds(ds.n(), 2, 1, 0, cid);
  NuisanceOptions opt;
  opt.method = NuisanceMethod::kOls;
  const NuisanceModel model = FitNuisance(ds, plan, 0, opt);
  const FoldEstimate fe = EstimateFold(ds, plan, 0, model);
  EXPECT_TRUE(fe.clustered);
  const FoldRegressors reg = BuildRegressors(ds, plan, 0, model);
  EXPECT_LT((fe.omega - ClusteredOmega(reg, fe.theta, reg.cluster_id)).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(MultistepTest, FloorOnlyTouchesNearSingularMatrices) {
  Eigen::Matrix2d good;
  good << 2.0, 0.5, 0.5, 1.0;
  EXPECT_FALSE(FloorOmega(good).floored);
  EXPECT_EQ(FloorOmega(good).omega, good);
  Eigen::Matrix2d flat;
  flat << 1.0, 1.0, 1.0, 1.0;
  const OmegaResult r = FloorOmega(flat);
  EXPECT_TRUE(r.floored);
  EXPECT_NEAR(r.omega(0, 0), 1.0 + 2e-10, 1e-15);
}

TEST(MultistepTest, EnsembleIsTheFoldMean) {
  std::vector<FoldEstimate> folds(3);
  folds[0].v_tau = 0.1;
  folds[1].v_tau = 0.4;
  folds[2].v_tau = 0.7;
  EXPECT_NEAR(EnsembleVcate(folds), 0.4, 1e-15);
  EXPECT_THROW(EnsembleVcate({}), Error);
}

}  // namespace
}  // namespace vcate
