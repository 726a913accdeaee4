#ifndef VCATE_WELFARE_H_
#define VCATE_WELFARE_H_

namespace vcate {

// Largest gain of the first-best targeted policy over the best uniform
// policy, over all CATE distributions with the given moments.
double WelfareBoundSimple(double vcate);                 // sqrt(V) / 2
double WelfareBoundGeneral(double ate, double vcate);    // (-|ate| + sqrt(V + ate^2)) / 2

// Bound for the outcome k1 + k2 Y.
double TransformBound(double ate, double vcate, double k1, double k2);

// Two-point CATE distribution with mean `ate` and variance `vcate` that
// attains WelfareBoundGeneral: tau1 with probability p1, tau0 otherwise.
struct TwoPointDesign {
  double p1 = 0.5;
  double tau0 = 0.0;
  double tau1 = 0.0;

  double Mean() const;
  double Variance() const;
  // E[max(tau, 0)] - max(E[tau], 0).
  double TargetingGain() const;
};

TwoPointDesign AdversarialDesign(double ate, double vcate);

}  // namespace vcate

#endif  // VCATE_WELFARE_H_
