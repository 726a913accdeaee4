#ifndef VCATE_LASSO_H_
#define VCATE_LASSO_H_

#include <cstdint>
#include <vector>

#include <Eigen/Dense>

namespace vcate {

struct LassoOptions {
  int n_lambda = 100;
  double lambda_min_ratio = 1e-4;
  int cv_folds = 10;
  std::uint64_t seed = 0;
  // Coordinate descent stops when no standardized coefficient moves by more
  // than this amount during a full sweep.
  double tolerance = 1e-11;
  int max_sweeps = 100000;
};

// Penalized least squares fit
//   (1/2n) ||y - b0 - X b||^2 + lambda * sum_j scale_j |b_j|
// which is the usual lasso on unit-variance columns, reported on the
// original scale of X.
struct LassoFit {
  double intercept = 0.0;
  Eigen::VectorXd coefficients;
  double lambda = 0.0;
  Eigen::VectorXd center;
  Eigen::VectorXd scale;
  // Zero-variance columns; their coefficient is fixed at 0.
  std::vector<int> dropped_columns;
  // y had no variance: the fit is intercept-only.
  bool constant_response = false;
  std::vector<double> lambda_path;
  std::vector<double> cv_risk;

  double Predict(const Eigen::Ref<const Eigen::RowVectorXd>& row) const;
  int ActiveCount() const;
};

// Smallest penalty at which every coefficient is exactly zero.
double LambdaMax(const Eigen::MatrixXd& x, const Eigen::VectorXd& y);

// Fit at a single, fixed penalty.
LassoFit FitLasso(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, double lambda,
                  const LassoOptions& options = {});

// Fits along a descending grid; element k of the result is the fit at lambdas[k].
std::vector<LassoFit> FitLassoPath(const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                                   const std::vector<double>& lambdas,
                                   const LassoOptions& options = {});

// Log-spaced grid of n_lambda points from lambda_max down to
// lambda_min_ratio * lambda_max, penalty picked by K-fold CV mean squared
// prediction error (exact minimizer, no one-standard-error rule).
LassoFit FitLassoCv(const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                    const LassoOptions& options = {});

// Objective value of `fit` (original scale) on (x, y) at fit.lambda.
double LassoObjective(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, const LassoFit& fit);

}  // namespace vcate

#endif  // VCATE_LASSO_H_
