#include "vcate/welfare.h"

#include <algorithm>
#include <cmath>

#include "vcate/errors.h"

namespace vcate {

namespace {

void CheckVcate(double vcate) {
  if (!(vcate >= 0.0) || !std::isfinite(vcate)) {
    Fail(ErrorCode::kInvalidArgument, "vcate must be finite and >= 0");
  }
}

}  // namespace

double WelfareBoundSimple(double vcate) {
  CheckVcate(vcate);
  return std::sqrt(vcate) / 2.0;
}

double WelfareBoundGeneral(double ate, double vcate) {
  CheckVcate(vcate);
  if (!std::isfinite(ate)) Fail(ErrorCode::kInvalidArgument, "ate must be finite");
  const double a = std::abs(ate);
  // sqrt(V + a^2) - a rewritten to avoid cancellation when V << a^2.
  if (vcate == 0.0) return 0.0;
  return vcate / (std::sqrt(vcate + a * a) + a) / 2.0;
}

double TransformBound(double ate, double vcate, double k1, double k2) {
  if (!std::isfinite(k1) || !std::isfinite(k2)) {
    Fail(ErrorCode::kInvalidArgument, "transformation coefficients must be finite");
  }
  return WelfareBoundGeneral(k2 * ate, k2 * k2 * vcate);
}

double TwoPointDesign::Mean() const { return p1 * tau1 + (1.0 - p1) * tau0; }

double TwoPointDesign::Variance() const {
  const double m = Mean();
  return p1 * (tau1 - m) * (tau1 - m) + (1.0 - p1) * (tau0 - m) * (tau0 - m);
}

double TwoPointDesign::TargetingGain() const {
  return p1 * std::max(tau1, 0.0) + (1.0 - p1) * std::max(tau0, 0.0) - std::max(Mean(), 0.0);
}

TwoPointDesign AdversarialDesign(double ate, double vcate) {
  CheckVcate(vcate);
  if (!(vcate > 0.0)) Fail(ErrorCode::kInvalidArgument, "adversarial design needs vcate > 0");
  if (ate > 0.0) {
    // Reflect tau -> -tau: the gain is unchanged by the sign of the outcome.
    const TwoPointDesign r = AdversarialDesign(-ate, vcate);
    return {1.0 - r.p1, -r.tau1, -r.tau0};
  }
  TwoPointDesign out;
  out.p1 = 0.5 - 0.5 * std::sqrt(ate * ate / (ate * ate + vcate));
  out.tau1 = ate + std::sqrt(vcate * (1.0 - out.p1) / out.p1);
  out.tau0 = ate - std::sqrt(vcate * out.p1 / (1.0 - out.p1));
  return out;
}

}  // namespace vcate
