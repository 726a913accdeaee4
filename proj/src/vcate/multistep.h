#ifndef VCATE_MULTISTEP_H_
#define VCATE_MULTISTEP_H_

#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "vcate/data_model.h"
#include "vcate/nuisance.h"

namespace vcate {

// Generated regressors for the units of one fold, in fold-member order:
//   w_i = [1, M(x_i), d_i - p_i, (d_i - p_i) S(x_i)],  lambda_i = 1 / (p_i (1 - p_i))
// with S = tau_hat - tau_bar centered at the in-fold mean and
// M = mu0_hat + p tau_hat.
struct FoldRegressors {
  Eigen::MatrixXd w;  // n_k x 4
  Eigen::VectorXd lambda;
  Eigen::VectorXd y;
  Eigen::VectorXd s;
  Eigen::VectorXd tau_hat;
  Eigen::VectorXd mu0_hat;
  Eigen::VectorXd pscore;
  std::vector<int> d;
  std::vector<std::int64_t> cluster_id;  // empty when unclustered
  double v_x = 0.0;
  double tau_bar = 0.0;
  // Every in-fold tau_hat is identical; then s = 0 and v_x = 0.
  bool degenerate = false;

  Eigen::Index n() const { return y.size(); }
};

FoldRegressors BuildRegressors(const Dataset& ds, const FoldPlan& plan, int k,
                               const NuisanceModel& model);

// Solves the lambda-weighted normal equations sum lambda_i w_i (y_i - w_i'theta) = 0.
// Throws SingularGram when the weighted design has rank below 4.
Eigen::Vector4d WlsTheta(const Eigen::MatrixXd& w, const Eigen::VectorXd& lambda,
                         const Eigen::VectorXd& y);

struct OmegaResult {
  Eigen::Matrix2d omega = Eigen::Matrix2d::Zero();
  // An eigenvalue fell below 1e-12 * trace and a ridge was added.
  bool floored = false;
};

// Sandwich covariance of (sqrt(n_k) beta_2 sqrt(v_x), sqrt(n_k)(v_x_hat / v_x - 1)).
// Throws SingularJ if the normalized weighted Gram matrix cannot be inverted.
Eigen::Matrix2d SandwichOmega(const FoldRegressors& reg, const Eigen::Vector4d& theta);

// Same with score vectors summed within clusters before the outer product.
// Needs at least two clusters in the fold.
Eigen::Matrix2d ClusteredOmega(const FoldRegressors& reg, const Eigen::Vector4d& theta,
                               std::span<const std::int64_t> cluster_id);

// Adds 1e-10 * trace * I when the smallest eigenvalue is below 1e-12 * trace.
OmegaResult FloorOmega(const Eigen::Matrix2d& omega);

struct FoldEstimate {
  Eigen::Vector4d theta = Eigen::Vector4d::Zero();  // (c1, c2, beta1, beta2)
  double v_x = 0.0;
  double v_tau = 0.0;
  Eigen::Matrix2d omega = Eigen::Matrix2d::Zero();
  std::size_t n_k = 0;
  bool degenerate = false;
  bool omega_floored = false;
  bool clustered = false;
  double tau_bar = 0.0;
  int fold = 0;
  int split = 0;
};

// Uses the clustered covariance whenever the dataset carries cluster ids.
FoldEstimate EstimateFold(const Dataset& ds, const FoldPlan& plan, int k,
                          const NuisanceModel& model);
FoldEstimate EstimateFold(const FoldRegressors& reg, int k, int split);

// Mean of fold v_tau values.
double EnsembleVcate(std::span<const FoldEstimate> folds);

// |v_tau - mean phi| with phi evaluated at the regression-implied nuisances
//   tau~ = beta1 + beta2 S,  mu0~ = c1 + c2 M - p tau~,  tau_av~ = in-fold mean of tau~.
double InfluenceIdentityCheck(const FoldRegressors& reg, const FoldEstimate& fe);

}  // namespace vcate

#endif  // VCATE_MULTISTEP_H_
