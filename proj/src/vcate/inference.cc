#include "vcate/inference.h"

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include <boost/math/distributions/chi_squared.hpp>
#include <boost/math/distributions/normal.hpp>

#include "vcate/errors.h"
#include "vcate/gchisq.h"

namespace vcate {

namespace {

void CheckAlpha(double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0)) Fail(ErrorCode::kInvalidArgument, "alpha must lie in (0, 1)");
}

double Median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t m = v.size() / 2;
  return v.size() % 2 == 1 ? v[m] : 0.5 * (v[m - 1] + v[m]);
}

}  // namespace

const char* CiKindName(CiKind kind) {
  switch (kind) {
    case CiKind::kSingleFold: return "single_fold";
    case CiKind::kDegenerate: return "degenerate";
    case CiKind::kMultifold: return "multifold";
    case CiKind::kSqrtTransformed: return "sqrt_transformed";
    case CiKind::kNaiveNormal: return "naive_normal";
  }
  return "unknown";
}

bool AcceptsVstar(const FoldEstimate& fe, double v_star, double alpha) {
  EmpiricalProcessParams p;
  p.n = static_cast<double>(fe.n_k);
  p.v_star = v_star;
  p.omega = fe.omega;
  for (int zeta : {1, -1}) {
    p.zeta = zeta;
    const QuadFormCoeffs q = ReduceParams(p);
    const auto [q_lo, q_hi] = CriticalValues(q, alpha);
    const double f = GchisqCdf(fe.v_tau - v_star, q);
    if (q_lo <= f && f <= q_hi) return true;
  }
  return false;
}

ConfidenceInterval SingleFoldCi(const FoldEstimate& fe, double alpha, const GridConfig& grid) {
  CheckAlpha(alpha);
  if (fe.degenerate) Fail(ErrorCode::kInvalidArgument, "single-fold interval needs a non-degenerate fold");
  if (grid.points < 2) Fail(ErrorCode::kInvalidArgument, "grid needs at least two points");
  const double v_hat = fe.v_tau;
  const double n = static_cast<double>(fe.n_k);
  const double o11 = fe.omega(0, 0);
  if (!(o11 > 0.0)) Fail(ErrorCode::kDegenerateOmega11, "omega(1,1) must be positive");
  const double tol = grid.tol_rel * std::max(1.0, v_hat);
  auto accepts = [&](double v) { return AcceptsVstar(fe, v, alpha); };

  double cap = v_hat + grid.cap_sds * std::sqrt(o11 * v_hat / n + o11 * o11 / (n * n));
  int doublings = 0;
  while (accepts(cap)) {
    if (++doublings > grid.max_doublings) {
      Fail(ErrorCode::kGridExhausted, "acceptance region reaches the grid limit " + std::to_string(cap));
    }
    cap *= 2.0;
  }

  std::vector<double> points(static_cast<std::size_t>(grid.points));
  for (int i = 0; i < grid.points; ++i) points[i] = cap * i / (grid.points - 1);
  points.insert(std::upper_bound(points.begin(), points.end(), v_hat), v_hat);
  std::vector<char> ok(points.size());
  for (std::size_t i = 0; i < points.size(); ++i) {
    ok[i] = points[i] == v_hat ? 1 : static_cast<char>(accepts(points[i]));
  }
  ok.back() = 0;  // the cap was rejected above
  const auto first = static_cast<std::size_t>(std::find(ok.begin(), ok.end(), 1) - ok.begin());
  const auto last =
      points.size() - 1 - static_cast<std::size_t>(std::find(ok.rbegin(), ok.rend(), 1) - ok.rbegin());

  ConfidenceInterval ci;
  ci.alpha = alpha;
  ci.kind = CiKind::kSingleFold;
  ci.fold = fe.fold;
  ci.split = fe.split;
  ci.hull = std::find(ok.begin() + first, ok.begin() + last, 0) != ok.begin() + last;

  if (first == 0) {
    ci.lo = 0.0;
  } else {
    double rej = points[first - 1], acc = points[first];
    while (acc - rej > tol) {
      const double mid = 0.5 * (rej + acc);
      (accepts(mid) ? acc : rej) = mid;
    }
    ci.lo = acc;
  }
  double acc = points[last], rej = points[last + 1];
  while (rej - acc > tol) {
    const double mid = 0.5 * (rej + acc);
    (accepts(mid) ? acc : rej) = mid;
  }
  ci.hi = acc;
  ci.lo = std::min(ci.lo, v_hat);
  ci.hi = std::max(ci.hi, v_hat);
  return ci;
}

ConfidenceInterval DegenerateAwareCi(const FoldEstimate& fe, double alpha, const GridConfig& grid) {
  if (!fe.degenerate) return SingleFoldCi(fe, alpha, grid);
  CheckAlpha(alpha);
  ConfidenceInterval ci;
  ci.alpha = alpha;
  ci.kind = CiKind::kDegenerate;
  ci.fold = fe.fold;
  ci.split = fe.split;
  return ci;
}

ConfidenceInterval MultifoldCi(std::span<const ConfidenceInterval> cis, double alpha) {
  CheckAlpha(alpha);
  if (cis.empty()) Fail(ErrorCode::kInvalidArgument, "multifold interval needs at least one input");
  std::vector<double> lows, highs;
  ConfidenceInterval out;
  for (const ConfidenceInterval& ci : cis) {
    if (std::abs(ci.alpha - alpha / 2.0) > 1e-12) {
      Fail(ErrorCode::kInvalidArgument, "multifold inputs must be built at alpha / 2");
    }
    lows.push_back(ci.lo);
    highs.push_back(ci.hi);
    out.hull = out.hull || ci.hull;
  }
  out.lo = Median(lows);
  out.hi = Median(highs);
  out.alpha = alpha;
  out.kind = CiKind::kMultifold;
  return out;
}

ConfidenceInterval SqrtCi(const ConfidenceInterval& ci) {
  if (ci.lo < 0.0 || ci.hi < ci.lo) Fail(ErrorCode::kInvalidArgument, "need 0 <= lo <= hi");
  ConfidenceInterval out = ci;
  out.lo = std::sqrt(ci.lo);
  out.hi = std::sqrt(ci.hi);
  out.kind = CiKind::kSqrtTransformed;
  return out;
}

HomogeneityResult HomogeneityTest(const FoldEstimate& fe, double alpha) {
  CheckAlpha(alpha);
  HomogeneityResult r;
  if (fe.degenerate) return r;
  if (!(fe.omega(0, 0) > 0.0)) Fail(ErrorCode::kDegenerateOmega11, "omega(1,1) must be positive");
  const boost::math::chi_squared chi(1.0);
  r.statistic = static_cast<double>(fe.n_k) * fe.v_tau / fe.omega(0, 0);
  r.reject = r.statistic > boost::math::quantile(chi, 1.0 - alpha);
  r.pvalue = boost::math::cdf(boost::math::complement(chi, r.statistic));
  return r;
}

double CrumpStatistic(const FoldEstimate& fe) {
  if (fe.degenerate) return -1.0 / std::sqrt(2.0);
  if (!(fe.omega(0, 0) > 0.0)) Fail(ErrorCode::kDegenerateOmega11, "omega(1,1) must be positive");
  const double stat = static_cast<double>(fe.n_k) * fe.v_tau / fe.omega(0, 0);
  return (stat - 1.0) / std::sqrt(2.0);
}

double LocalPower(double v, double omega11, double alpha) {
  CheckAlpha(alpha);
  if (v < 0.0 || !(omega11 > 0.0)) Fail(ErrorCode::kInvalidArgument, "need v >= 0 and omega11 > 0");
  const boost::math::normal z;
  const double crit = boost::math::quantile(z, 1.0 - alpha / 2.0);
  const double delta = std::sqrt(v / omega11);
  return boost::math::cdf(boost::math::complement(z, crit - delta)) +
         boost::math::cdf(z, -crit - delta);
}

}  // namespace vcate
