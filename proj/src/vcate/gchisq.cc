#include "vcate/gchisq.h"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <string>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/tools/roots.hpp>

#include "vcate/errors.h"

namespace vcate {

namespace {

constexpr int kHermiteNodes = 128;
constexpr double kTail = 12.0;
constexpr double kInvSqrt2 = 0.70710678118654752440;
constexpr double kInvSqrt2Pi = 0.39894228040143267794;

double NormalCdf(double x) { return 0.5 * std::erfc(-x * kInvSqrt2); }
double NormalSf(double x) { return 0.5 * std::erfc(x * kInvSqrt2); }
double NormalPdf(double x) { return kInvSqrt2Pi * std::exp(-0.5 * x * x); }

// P(-s - c <= Z <= s - c) for s >= 0, evaluated on whichever tail avoids
// cancellation.
double Band(double s, double c) {
  const double a = -s - c, b = s - c;
  if (a > 0.0) return NormalSf(a) - NormalSf(b);
  if (b < 0.0) return NormalCdf(b) - NormalCdf(a);
  return 1.0 - NormalSf(b) - NormalCdf(a);
}

// Nodes and weights for E[f(Z)], Z ~ N(0, 1), from the eigen-decomposition
// of the Jacobi matrix of the probabilists' Hermite polynomials.
struct HermiteRule {
  std::array<double, kHermiteNodes> node;
  std::array<double, kHermiteNodes> weight;

  HermiteRule() {
    Eigen::VectorXd diag = Eigen::VectorXd::Zero(kHermiteNodes);
    Eigen::VectorXd sub(kHermiteNodes - 1);
    for (int k = 1; k < kHermiteNodes; ++k) sub[k - 1] = std::sqrt(static_cast<double>(k));
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig;
    eig.computeFromTridiagonal(diag, sub, Eigen::ComputeEigenvectors);
    double total = 0.0;
    for (int i = 0; i < kHermiteNodes; ++i) {
      node[i] = eig.eigenvalues()[i];
      const double v = eig.eigenvectors()(0, i);
      weight[i] = v * v;
      total += weight[i];
    }
    for (double& w : weight) w /= total;
  }
};

const HermiteRule& Hermite() {
  static const HermiteRule rule;
  return rule;
}

template <class F>
double HermiteExpect(F f) {
  const HermiteRule& h = Hermite();
  double sum = 0.0;
  for (int i = 0; i < kHermiteNodes; ++i) sum += h.weight[i] * f(h.node[i]);
  return sum;
}

struct Shape {
  double c;  // kappa1 / (2 nu1)
  double a;  // v + kappa1^2 / (4 nu1)
};

Shape ShapeOf(double v, const QuadFormCoeffs& q) {
  const double c = q.kappa1 / (2.0 * q.nu1);
  return {c, v + q.kappa1 * c / 2.0};
}

// P(nu1 (Z1 + c)^2 <= t nu1) for the threshold t.
double ChiBand(double t, double c) { return t <= 0.0 ? 0.0 : Band(std::sqrt(t), c); }

double CdfHermiteZ1(const Shape& s, const QuadFormCoeffs& q) {
  return HermiteExpect([&](double z) {
    const double u = z + s.c;
    return NormalCdf((s.a - q.nu1 * u * u) / q.kappa2);
  });
}

double CdfHermiteZ2(const Shape& s, const QuadFormCoeffs& q) {
  return HermiteExpect(
      [&](double z) { return ChiBand((s.a - q.kappa2 * z) / q.nu1, s.c); });
}

double CdfAdaptiveZ2(const Shape& s, const QuadFormCoeffs& q) {
  // The integrand vanishes for z >= a / kappa2 and behaves like
  // sqrt(a / kappa2 - z) below it; z = kink - u^2 makes it smooth in u.
  const double kink = s.a / q.kappa2;
  if (kink <= -kTail) return 0.0;
  const double scale = std::sqrt(q.kappa2 / q.nu1);
  auto f = [&](double u) {
    return 2.0 * u * NormalPdf(kink - u * u) * Band(scale * u, s.c);
  };
  // z is restricted to [-kTail, min(kink, kTail)].
  const double u_min = std::sqrt(std::max(0.0, kink - kTail));
  const double u_max = std::sqrt(kink + kTail);
  // Break at the density mode z = 0 when it lies inside the range.
  const double u_mode = kink > 0.0 ? std::sqrt(kink) : 0.0;
  using boost::math::quadrature::gauss_kronrod;
  double sum = 0.0;
  if (u_mode > u_min) sum += gauss_kronrod<double, 31>::integrate(f, u_min, u_mode, 12, 1e-11);
  sum += gauss_kronrod<double, 31>::integrate(f, u_mode, u_max, 12, 1e-11);
  return sum;
}

double Clamp01(double p) { return std::clamp(p, 0.0, 1.0); }

void CheckCoeffs(const QuadFormCoeffs& q) {
  if (!(q.nu1 > 0.0) || !(q.kappa2 >= 0.0) || !std::isfinite(q.kappa1) ||
      !std::isfinite(q.kappa2) || !std::isfinite(q.nu1)) {
    Fail(ErrorCode::kInvalidArgument, "generalized chi-square needs nu1 > 0 and kappa2 >= 0");
  }
}

}  // namespace

QuadFormCoeffs ReduceParams(const EmpiricalProcessParams& p) {
  const double o11 = p.omega(0, 0), o12 = p.omega(0, 1), o22 = p.omega(1, 1);
  if (!(o11 > 0.0)) Fail(ErrorCode::kDegenerateOmega11, "omega(1,1) must be positive");
  if (!(p.n > 0.0) || !(p.v_star >= 0.0) || (p.zeta != 1 && p.zeta != -1) || o22 < 0.0) {
    Fail(ErrorCode::kInvalidArgument, "need n > 0, v_star >= 0, zeta = +/-1, omega(2,2) >= 0");
  }
  const double rho = o22 > 0.0 ? std::clamp(o12 / std::sqrt(o11 * o22), -1.0, 1.0) : 0.0;
  const double root_n = std::sqrt(p.n);
  QuadFormCoeffs q;
  q.nu1 = o11 / p.n;
  q.kappa1 = 2.0 * (p.zeta * std::sqrt(p.v_star * o11 / p.n) +
                    p.v_star / (2.0 * root_n) * rho * std::sqrt(o22));
  q.kappa2 = p.v_star / root_n * std::sqrt(o22 * (1.0 - rho * rho));
  return q;
}

double SampleProcess(const EmpiricalProcessParams& p, double z1, double z2) {
  const double l11 = std::sqrt(p.omega(0, 0));
  const double l21 = p.omega(1, 0) / l11;
  const double l22 = std::sqrt(std::max(0.0, p.omega(1, 1) - l21 * l21));
  const double e1 = l11 * z1;
  const double e2 = l21 * z1 + l22 * z2;
  return e1 * e1 / p.n + 2.0 * p.zeta * std::sqrt(p.v_star / p.n) * e1 +
         p.v_star / std::sqrt(p.n) * e2;
}

double SampleQuadForm(const QuadFormCoeffs& c, double z1, double z2) {
  const double shift = z1 + c.kappa1 / (2.0 * c.nu1);
  return c.nu1 * shift * shift + c.kappa2 * z2 - c.kappa1 * c.kappa1 / (4.0 * c.nu1);
}

double GchisqCdfWith(double v, const QuadFormCoeffs& q, GchisqRule rule) {
  CheckCoeffs(q);
  if (std::isnan(v)) Fail(ErrorCode::kInvalidArgument, "cdf argument is NaN");
  const Shape s = ShapeOf(v, q);
  if (q.kappa2 == 0.0) return Clamp01(ChiBand(s.a / q.nu1, s.c));
  if (rule == GchisqRule::kAuto) {
    // Conditioning on Z1 leaves a normal cdf whose transition in z1 has width
    // about kappa2 / (2 nu1 |z1 + c|); it must span several Hermite nodes.
    // Otherwise condition on Z2, where the only kink is at z2 = a / kappa2.
    if (q.kappa2 >= q.nu1 * (std::abs(s.c) + 8.0)) {
      rule = GchisqRule::kHermiteZ1;
    } else if (s.a / q.kappa2 >= 10.0) {
      rule = GchisqRule::kHermiteZ2;
    } else {
      rule = GchisqRule::kAdaptiveZ2;
    }
  }
  switch (rule) {
    case GchisqRule::kHermiteZ1: return Clamp01(CdfHermiteZ1(s, q));
    case GchisqRule::kHermiteZ2: return Clamp01(CdfHermiteZ2(s, q));
    default: return Clamp01(CdfAdaptiveZ2(s, q));
  }
}

double GchisqCdf(double v, const QuadFormCoeffs& c) {
  if (std::isinf(v)) return v > 0 ? 1.0 : 0.0;
  return GchisqCdfWith(v, c, GchisqRule::kAuto);
}

double GchisqQuantile(double u, const QuadFormCoeffs& q) {
  CheckCoeffs(q);
  if (!(u > 0.0 && u < 1.0)) Fail(ErrorCode::kInvalidArgument, "quantile level must lie in (0, 1)");
  const double mean = q.nu1;
  const double sd = std::sqrt(2.0 * q.nu1 * q.nu1 + q.kappa1 * q.kappa1 + q.kappa2 * q.kappa2);
  const double floor = q.kappa2 == 0.0 ? -q.kappa1 * q.kappa1 / (4.0 * q.nu1) : -INFINITY;
  auto f = [&](double v) { return GchisqCdf(v, q) - u; };
  double lo = std::max(floor, mean - 4.0 * sd), hi = mean + 4.0 * sd;
  double flo = f(lo), fhi = f(hi);
  for (int i = 0; flo > 0.0 && i < 200; ++i) {
    hi = lo;
    fhi = flo;
    lo = std::max(floor, lo - 4.0 * sd * (i + 1));
    flo = f(lo);
  }
  for (int i = 0; fhi < 0.0 && i < 200; ++i) {
    lo = hi;
    flo = fhi;
    hi += 4.0 * sd * (i + 1);
    fhi = f(hi);
  }
  if (flo > 0.0 || fhi < 0.0) Fail(ErrorCode::kInternal, "could not bracket quantile");
  if (flo == 0.0) return lo;
  if (fhi == 0.0) return hi;
  std::uintmax_t iters = 400;
  const auto [a, b] = boost::math::tools::toms748_solve(
      f, lo, hi, flo, fhi, boost::math::tools::eps_tolerance<double>(52), iters);
  const double fa = std::abs(f(a)), fb = std::abs(f(b));
  return fa <= fb ? a : b;
}

std::pair<double, double> CriticalValues(const QuadFormCoeffs& c, double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0)) Fail(ErrorCode::kInvalidArgument, "alpha must lie in (0, 1)");
  const double q_lo = std::min(alpha / 2.0, GchisqCdf(0.0, c));
  const double width = 1.0 - alpha;
  double q_hi = width + q_lo;
  for (int i = 0; i < 16 && q_hi - q_lo != width; ++i) {
    q_hi = std::nextafter(q_hi, q_hi - q_lo < width ? 2.0 : -1.0);
  }
  return {q_lo, q_hi};
}

}  // namespace vcate
