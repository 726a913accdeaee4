#ifndef VCATE_DML_TWOSTEP_H_
#define VCATE_DML_TWOSTEP_H_

#include <cstdint>
#include <span>

#include <Eigen/Dense>

#include "vcate/data_model.h"
#include "vcate/design.h"
#include "vcate/interval.h"
#include "vcate/nuisance.h"

namespace vcate {

// Uncentered efficient influence function of the VCATE,
//   (tau - tau_av)^2 + 2 (tau - tau_av) [d (y - mu0 - tau) / p - (1 - d)(y - mu0) / (1 - p)].
double EfficientInfluence(double y, int d, double tau, double mu0, double p, double tau_av);

struct InfluenceEval {
  Eigen::VectorXd phi;
  double mean = 0.0;
  // Sample variance with divisor n - 1.
  double sample_var = 0.0;
  double tau_av = 0.0;
};

// Two-step debiased estimator: mean of phi at the cross-fitted nuisances,
// with tau_av the full-sample mean of the cross-fitted CATE. `models[k]` must
// have been fitted on the complement of fold k. The estimate may be negative.
InfluenceEval TwoStepEstimate(const Dataset& ds, const FoldPlan& plan,
                              std::span<const NuisanceModel> models);

// estimate +/- z_{1-alpha/2} sqrt(sample_var / n); not truncated at zero.
ConfidenceInterval TwoStepNaiveCi(double estimate, double sample_var, std::size_t n,
                                  double alpha);

// Monte Carlo evaluation of
//   V(phi) = V((tau(X) - tau_av)^2) + 4 E[(tau(X) - tau_av)^2 (s1^2(X)/p + s0^2(X)/(1-p))]
// under the design, from `draws` covariate draws.
double OracleVarianceBound(const SimulationDesign& design, int draws = 1000000,
                           std::uint64_t seed = 1);

// Upper bound kappa^2 V^2 + 4 kappa V sqrt(E[h(X)^2]) with
// h = s1^2/p + s0^2/(1-p) and kappa^2 = E[(tau - tau_av)^4] / V^2, from the
// same Monte Carlo draws.
double OracleVarianceUpperBound(const SimulationDesign& design, int draws = 1000000,
                                std::uint64_t seed = 1);

}  // namespace vcate

#endif  // VCATE_DML_TWOSTEP_H_
