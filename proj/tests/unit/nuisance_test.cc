#include "vcate/nuisance.h"

#include <vector>

#include <gtest/gtest.h>

#include "test_util.h"
#include "vcate/design.h"
#include "vcate/errors.h"

namespace vcate {
namespace {

TEST(NuisanceTest, MethodNamesRoundTrip) {
  for (NuisanceMethod m : {NuisanceMethod::kLasso, NuisanceMethod::kOls, NuisanceMethod::kOracle,
                           NuisanceMethod::kOracleDirection}) {
    EXPECT_EQ(ParseNuisanceMethod(NuisanceMethodName(m)), m);
  }
  EXPECT_THROW(ParseNuisanceMethod("forest"), Error);
}

TEST(NuisanceTest, OlsFitsEachArmOnTheComplement) {
  const Dataset ds = testing::LinearExperiment(400, 3, 0.5, 12);
  const FoldPlan plan = MakeFolds(ds.n(), 2, 1);
  NuisanceOptions opt;
  opt.method = NuisanceMethod::kOls;
  const NuisanceModel model = FitNuisance(ds, plan, 0, opt);
  for (int arm = 0; arm < 2; ++arm) {
    std::vector<Eigen::Index> rows;
    for (std::size_t i : plan.Complement(0)) {
      if (ds.d[i] == arm) rows.push_back(static_cast<Eigen::Index>(i));
    }
    Eigen::MatrixXd a(rows.size(), 4);
    a.col(0).setOnes();
    a.rightCols(3) = ds.x(rows, Eigen::all);
    const Eigen::VectorXd ya = ds.y(rows);
    const Eigen::VectorXd beta = (a.transpose() * a).ldlt().solve(a.transpose() * ya);
    const LinearPredictor& fit = arm == 1 ? model.mu1 : model.mu0;
    EXPECT_NEAR(fit.intercept, beta[0], 1e-9);
    EXPECT_LT((fit.coefficients - beta.tail(3)).cwiseAbs().maxCoeff(), 1e-9);
  }
  EXPECT_FALSE(model.degenerate_tau);
  EXPECT_NEAR(model.PredictTau(ds.x.row(0)), model.PredictMu1(ds.x.row(0)) - model.PredictMu0(ds.x.row(0)),
              1e-14);
}

TEST(NuisanceTest, OlsHandlesRankDeficiencyAndConstantOutcome) {
  Eigen::MatrixXd x = testing::Gaussian(30, 2, 3);
  Eigen::MatrixXd dup(30, 3);
  dup << x, x.col(0);
  const Eigen::VectorXd y = x.col(0) * 2.0;
  const LinearPredictor fit = FitOls(dup, y);
  EXPECT_NEAR(fit.coefficients[0], 1.0, 1e-9);
  EXPECT_NEAR(fit.coefficients[2], 1.0, 1e-9);
  const LinearPredictor flat = FitOls(dup, Eigen::VectorXd::Constant(30, 4.0));
  EXPECT_DOUBLE_EQ(flat.intercept, 4.0);
  EXPECT_EQ(flat.coefficients, Eigen::VectorXd::Zero(3));
}

TEST(NuisanceTest, LassoWithoutSignalIsDegenerate) {
  Dataset ds = testing::LinearExperiment(300, 4, 0.0, 5);
  for (Eigen::Index i = 0; i < ds.y.size(); ++i) ds.y[i] = 0.3 * ds.d[i] + 0.01 * (i % 7);
  const FoldPlan plan = MakeFolds(ds.n(), 2, 2);
  NuisanceOptions opt;
  opt.lasso.n_lambda = 1;
  const NuisanceModel model = FitNuisance(ds, plan, 1, opt);
  EXPECT_TRUE(model.degenerate_tau);
  EXPECT_EQ(model.fold, 1);
}

TEST(NuisanceTest, OracleMethodsUseTheDesign) {
  SimulationDesign design;
  design.v_tau = 0.0;
  design.n = 200;
  const Dataset ds = GenDataset(design, 4);
  const FoldPlan plan = MakeFolds(ds.n(), 2, 1);
  NuisanceOptions opt;
  opt.method = NuisanceMethod::kOracle;
  opt.design = design;
  const NuisanceModel exact = FitNuisance(ds, plan, 0, opt);
  EXPECT_TRUE(exact.degenerate_tau);
  EXPECT_DOUBLE_EQ(exact.PredictMu0(ds.x.row(3)), OracleMu0(design, ds.x.row(3)));
  EXPECT_DOUBLE_EQ(exact.PredictTau(ds.x.row(3)), OracleTau(design, ds.x.row(3)));

  opt.method = NuisanceMethod::kOracleDirection;
  const NuisanceModel dir = FitNuisance(ds, plan, 0, opt);
  EXPECT_FALSE(dir.degenerate_tau);
  const double expected = design.tau + ds.x.row(3).tail(design.J).dot(design.Direction());
  EXPECT_NEAR(dir.PredictTau(ds.x.row(3)), expected, 1e-14);

  opt.design.reset();
  EXPECT_THROW(FitNuisance(ds, plan, 0, opt), Error);
}

TEST(NuisanceTest, EmptyArmIsReported) {
  Dataset ds = testing::LinearExperiment(20, 2, 0.1, 1);
  for (int& d : ds.d) d = 0;
  ds.d[0] = 1;
  const FoldPlan plan = MakeFolds(ds.n(), 2, 1);
  NuisanceOptions opt;
  opt.method = NuisanceMethod::kOls;
  try {
    FitNuisance(ds, plan, 0, opt);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kEmptyArm);
  }
}

}  // namespace
}  // namespace vcate
