#ifndef VCATE_DESIGN_H_
#define VCATE_DESIGN_H_

#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "vcate/data_model.h"

namespace vcate {

// Gaussian-covariate experiment with a sparse, geometrically decaying linear
// CATE. Covariates come in two blocks of J columns each, [X0 | X1], with
// Corr(X0_j, X1_j) = rho and independence otherwise:
//
//   Y0 = c + b0'X0 + U0 * sqrt(st2 + (k'X0)^2)
//   Y1 = c + tau + b0'X0 + bt'X1 + U1 * sqrt(st2 + (k'X1)^2)
//
// with b0 = l * sqrt(v_mu), bt = l * sqrt(v_tau), k = l * sqrt(sigma2 - st2)
// and l_j^2 proportional to decay^(j-1), normalized to sum to one. The
// defaults give V(Y0) = 1 and Var(tau(X)) = v_tau. Treatment is Bernoulli(0.5).
struct SimulationDesign {
  int J = 5;
  double rho = 0.5;
  double decay = 0.7;
  double v_mu = 0.3;
  double v_tau = 0.0;
  double tau = 0.15;
  double sigma2 = 0.7;
  double sigma_tilde2 = 0.21;
  double c = 1.0;
  double pscore = 0.5;
  int n = 2500;
  int K = 2;
  std::uint64_t seed = 0;

  int p() const { return 2 * J; }
  // l_j^2, j = 1..J.
  Eigen::VectorXd SquaredWeights() const;
  Eigen::VectorXd Beta0() const;
  Eigen::VectorXd BetaTau() const;
  Eigen::VectorXd Kappa() const;
  // Unit-variance heterogeneity direction l'X1 (defined even when v_tau = 0).
  Eigen::VectorXd Direction() const;

  void Validate() const;
};

// Dataset plus both potential outcomes (for Monte Carlo checks).
struct SimulatedSample {
  Dataset data;
  Eigen::VectorXd y0;
  Eigen::VectorXd y1;
};

SimulatedSample GenSample(const SimulationDesign& design, std::uint64_t seed);
Dataset GenDataset(const SimulationDesign& design, std::uint64_t seed);

// Closed-form VCATE of the design (the configured v_tau).
double TrueVcate(const SimulationDesign& design);

// Population quantities at a covariate row laid out as [X0 | X1].
double OracleMu0(const SimulationDesign& design, const Eigen::Ref<const Eigen::RowVectorXd>& x);
double OracleMu1(const SimulationDesign& design, const Eigen::Ref<const Eigen::RowVectorXd>& x);
double OracleTau(const SimulationDesign& design, const Eigen::Ref<const Eigen::RowVectorXd>& x);
double OracleSigma2(const SimulationDesign& design, int arm,
                    const Eigen::Ref<const Eigen::RowVectorXd>& x);

// Var(E[tau(X) | X_S]) for the covariate subset S (column indices into
// [X0 | X1]), by Gaussian conditioning. Monotone in S.
double OracleVcateForCovariates(const SimulationDesign& design, std::span<const int> columns);

}  // namespace vcate

#endif  // VCATE_DESIGN_H_
