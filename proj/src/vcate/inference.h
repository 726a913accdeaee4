#ifndef VCATE_INFERENCE_H_
#define VCATE_INFERENCE_H_

#include <span>

#include "vcate/interval.h"
#include "vcate/multistep.h"

namespace vcate {

struct GridConfig {
  int points = 512;
  // The grid spans [0, v_hat + cap_sds * sqrt(o11 v_hat / n_k + o11^2 / n_k^2)].
  double cap_sds = 20.0;
  // Endpoint bisection stops at tol_rel * max(1, v_hat).
  double tol_rel = 1e-6;
  // The cap doubles at most this many times while its end point is accepted.
  int max_doublings = 30;
};

// Whether v_star lies in the acceptance region for some zeta = +/-1:
// q_lo <= F(v_hat - v_star) <= q_hi.
bool AcceptsVstar(const FoldEstimate& fe, double v_star, double alpha);

// Test-inversion interval for one non-degenerate fold. Always contains
// fe.v_tau. Throws GridExhausted when the acceptance region is unbounded
// within the cap limit.
ConfidenceInterval SingleFoldCi(const FoldEstimate& fe, double alpha,
                                const GridConfig& grid = {});

// [0, 0] for degenerate folds, SingleFoldCi otherwise.
ConfidenceInterval DegenerateAwareCi(const FoldEstimate& fe, double alpha,
                                     const GridConfig& grid = {});

// Median lower and median upper bound of intervals built at alpha / 2 (even
// counts use the midpoint of the two central values).
ConfidenceInterval MultifoldCi(std::span<const ConfidenceInterval> cis, double alpha);

ConfidenceInterval SqrtCi(const ConfidenceInterval& ci);

struct HomogeneityResult {
  bool reject = false;
  double statistic = 0.0;
  double pvalue = 1.0;
};

// Wald test of beta2 = 0: n_k v_tau / omega(0,0) against chi-square(1).
HomogeneityResult HomogeneityTest(const FoldEstimate& fe, double alpha);

// (statistic - 1) / sqrt(2).
double CrumpStatistic(const FoldEstimate& fe);

// Two-sided local power of the homogeneity test at drift v = n V:
//   1 - Phi(z - delta) + Phi(-z - delta),  delta = sqrt(v / omega11),
// z the 1 - alpha/2 normal quantile.
double LocalPower(double v, double omega11, double alpha);

}  // namespace vcate

#endif  // VCATE_INFERENCE_H_
