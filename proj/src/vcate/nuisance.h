#ifndef VCATE_NUISANCE_H_
#define VCATE_NUISANCE_H_

#include <optional>
#include <string>

#include <Eigen/Dense>

#include "vcate/data_model.h"
#include "vcate/design.h"
#include "vcate/lasso.h"

namespace vcate {

enum class NuisanceMethod {
  kLasso,
  kOls,
  // True conditional means of a SimulationDesign.
  kOracle,
  // True mu0, with tau replaced by tau + l'X1 for the design's unit-variance
  // direction l: the first stage knows the heterogeneity direction but not
  // its size, so the fitted CATE never degenerates.
  kOracleDirection,
};

const char* NuisanceMethodName(NuisanceMethod method);
NuisanceMethod ParseNuisanceMethod(const std::string& name);

struct NuisanceOptions {
  NuisanceMethod method = NuisanceMethod::kLasso;
  LassoOptions lasso;
  // Required by the oracle methods.
  std::optional<SimulationDesign> design;
};

struct LinearPredictor {
  double intercept = 0.0;
  Eigen::VectorXd coefficients;

  double Predict(const Eigen::Ref<const Eigen::RowVectorXd>& x) const {
    return intercept + x.dot(coefficients);
  }
};

// Arm-wise outcome regressions fitted on the complement of one fold.
struct NuisanceModel {
  LinearPredictor mu0;
  LinearPredictor mu1;
  int fold = 0;
  // The fitted CATE does not depend on x.
  bool degenerate_tau = false;

  double PredictMu0(const Eigen::Ref<const Eigen::RowVectorXd>& x) const {
    return mu0.Predict(x);
  }
  double PredictMu1(const Eigen::Ref<const Eigen::RowVectorXd>& x) const {
    return mu1.Predict(x);
  }
  double PredictTau(const Eigen::Ref<const Eigen::RowVectorXd>& x) const {
    return mu1.Predict(x) - mu0.Predict(x);
  }
};

// Fits mu0 on the controls and mu1 on the treated units outside fold k.
// Throws EmptyArm when either arm has fewer than two such units.
NuisanceModel FitNuisance(const Dataset& ds, const FoldPlan& plan, int k,
                          const NuisanceOptions& options);

// Least squares with intercept; rank-deficient designs get the minimum-norm
// slope vector.
LinearPredictor FitOls(const Eigen::MatrixXd& x, const Eigen::VectorXd& y);

}  // namespace vcate

#endif  // VCATE_NUISANCE_H_
