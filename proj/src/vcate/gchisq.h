#ifndef VCATE_GCHISQ_H_
#define VCATE_GCHISQ_H_

#include <utility>

#include <Eigen/Dense>

namespace vcate {

// Limit process of V_hat - V*:
//   G = (e1'L z)^2 / n + 2 zeta sqrt(V*/n) (e1'L z) + (V*/sqrt(n)) (e2'L z)
// with L the lower Cholesky factor of omega and z ~ N(0, I2).
struct EmpiricalProcessParams {
  double n = 1.0;
  double v_star = 0.0;
  Eigen::Matrix2d omega = Eigen::Matrix2d::Identity();
  int zeta = 1;
};

// G = nu1 (Z1 + kappa1 / (2 nu1))^2 + kappa2 Z2 - kappa1^2 / (4 nu1).
struct QuadFormCoeffs {
  double nu1 = 1.0;
  double kappa1 = 0.0;
  double kappa2 = 0.0;
};

// Throws DegenerateOmega11 unless omega(0,0) > 0.
QuadFormCoeffs ReduceParams(const EmpiricalProcessParams& p);

// One draw of G from the defining expression and from the reduced form.
double SampleProcess(const EmpiricalProcessParams& p, double z1, double z2);
double SampleQuadForm(const QuadFormCoeffs& c, double z1, double z2);

// P(G <= v).
double GchisqCdf(double v, const QuadFormCoeffs& c);

// v with |F(v) - u| <= 1e-8, u in (0, 1).
double GchisqQuantile(double u, const QuadFormCoeffs& c);

// (q_lo, q_hi) in probability units: q_lo = min(alpha/2, F(0)),
// q_hi - q_lo == 1 - alpha in floating point.
std::pair<double, double> CriticalValues(const QuadFormCoeffs& c, double alpha);

// Same as GchisqCdf but forcing the quadrature route; for testing.
enum class GchisqRule { kAuto, kHermiteZ1, kHermiteZ2, kAdaptiveZ2 };
double GchisqCdfWith(double v, const QuadFormCoeffs& c, GchisqRule rule);

}  // namespace vcate

#endif  // VCATE_GCHISQ_H_
