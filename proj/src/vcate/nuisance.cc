#include "vcate/nuisance.h"

#include <algorithm>
#include <string>
#include <vector>

#include "vcate/errors.h"

namespace vcate {

namespace {

std::uint64_t MixSeed(std::uint64_t seed, std::uint64_t salt) {
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (salt + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

LinearPredictor FromLasso(const LassoFit& fit) { return {fit.intercept, fit.coefficients}; }

const SimulationDesign& RequireDesign(const NuisanceOptions& options, int p) {
  if (!options.design) {
    Fail(ErrorCode::kInvalidArgument, "oracle nuisance needs a simulation design");
  }
  if (options.design->p() != p) {
    Fail(ErrorCode::kInvalidArgument, "oracle design has " + std::to_string(options.design->p()) +
                                          " covariates, data has " + std::to_string(p));
  }
  return *options.design;
}

}  // namespace

const char* NuisanceMethodName(NuisanceMethod method) {
  switch (method) {
    case NuisanceMethod::kLasso: return "lasso";
    case NuisanceMethod::kOls: return "ols";
    case NuisanceMethod::kOracle: return "oracle";
    case NuisanceMethod::kOracleDirection: return "oracle_direction";
  }
  return "unknown";
}

NuisanceMethod ParseNuisanceMethod(const std::string& name) {
  if (name == "lasso") return NuisanceMethod::kLasso;
  if (name == "ols") return NuisanceMethod::kOls;
  if (name == "oracle") return NuisanceMethod::kOracle;
  if (name == "oracle_direction") return NuisanceMethod::kOracleDirection;
  Fail(ErrorCode::kConfigError, "unknown first-stage method '" + name + "'");
}

LinearPredictor FitOls(const Eigen::MatrixXd& x, const Eigen::VectorXd& y) {
  if (x.rows() != y.size() || y.size() == 0) {
    Fail(ErrorCode::kInvalidArgument, "ols design and response sizes differ");
  }
  LinearPredictor out;
  out.coefficients = Eigen::VectorXd::Zero(x.cols());
  const double ybar = y.mean();
  if ((y.array() == y[0]).all() || x.cols() == 0) {
    out.intercept = (y.array() == y[0]).all() ? y[0] : ybar;
    return out;
  }
  const Eigen::RowVectorXd center = x.colwise().mean();
  const Eigen::MatrixXd xc = x.rowwise() - center;
  const Eigen::VectorXd yc = y.array() - ybar;
  Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(xc);
  out.coefficients = cod.solve(yc);
  out.intercept = ybar - center.dot(out.coefficients);
  return out;
}

NuisanceModel FitNuisance(const Dataset& ds, const FoldPlan& plan, int k,
                          const NuisanceOptions& options) {
  if (k < 0 || k >= plan.K) Fail(ErrorCode::kInvalidArgument, "fold index out of range");
  if (plan.assignment.size() != ds.n()) {
    Fail(ErrorCode::kInvalidArgument, "fold plan size differs from dataset");
  }
  NuisanceModel model;
  model.fold = k;
  const int p = static_cast<int>(ds.p());

  if (options.method == NuisanceMethod::kOracle ||
      options.method == NuisanceMethod::kOracleDirection) {
    const SimulationDesign& design = RequireDesign(options, p);
    const int J = design.J;
    model.mu0.intercept = design.c;
    model.mu0.coefficients = Eigen::VectorXd::Zero(p);
    model.mu0.coefficients.head(J) = design.Beta0();
    model.mu1 = model.mu0;
    model.mu1.intercept += design.tau;
    const Eigen::VectorXd slope =
        options.method == NuisanceMethod::kOracle ? design.BetaTau() : design.Direction();
    model.mu1.coefficients.tail(J) += slope;
    model.degenerate_tau = (slope.array() == 0.0).all();
    return model;
  }

  std::vector<Eigen::Index> arm[2];
  for (std::size_t i : plan.Complement(k)) arm[ds.d[i]].push_back(static_cast<Eigen::Index>(i));
  for (int a = 0; a < 2; ++a) {
    if (arm[a].size() < 2) {
      Fail(ErrorCode::kEmptyArm, std::string(a == 1 ? "treated" : "control") +
                                     " arm outside fold " + std::to_string(k + 1) + " has " +
                                     std::to_string(arm[a].size()) + " units");
    }
  }
  LinearPredictor* target[2] = {&model.mu0, &model.mu1};
  for (int a = 0; a < 2; ++a) {
    const Eigen::MatrixXd xa = ds.x(arm[a], Eigen::all);
    const Eigen::VectorXd ya = ds.y(arm[a]);
    if (options.method == NuisanceMethod::kOls) {
      *target[a] = FitOls(xa, ya);
    } else {
      LassoOptions lasso = options.lasso;
      lasso.seed = MixSeed(options.lasso.seed,
                           static_cast<std::uint64_t>(plan.split_id) * 1024u + 2u * k + a);
      lasso.cv_folds = std::min<int>(lasso.cv_folds, static_cast<int>(arm[a].size()));
      *target[a] = FromLasso(FitLassoCv(xa, ya, lasso));
    }
  }
  model.degenerate_tau = (model.mu1.coefficients.array() == model.mu0.coefficients.array()).all();
  return model;
}

}  // namespace vcate
