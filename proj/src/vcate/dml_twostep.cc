#include "vcate/dml_twostep.h"

#include <cmath>
#include <random>
#include <string>

#include <boost/math/distributions/normal.hpp>

#include "vcate/errors.h"

namespace vcate {

namespace {

struct OracleMoments {
  double mean_a2 = 0.0;   // E[(tau - tau_av)^2]
  double mean_a4 = 0.0;   // E[(tau - tau_av)^4]
  double mean_a2h = 0.0;  // E[(tau - tau_av)^2 h]
  double mean_h2 = 0.0;   // E[h^2]
};

OracleMoments SampleOracleMoments(const SimulationDesign& design, int draws,
                                  std::uint64_t seed) {
  design.Validate();
  if (draws < 2) Fail(ErrorCode::kInvalidArgument, "need at least two Monte Carlo draws");
  const int J = design.J;
  std::seed_seq seq{static_cast<std::uint32_t>(seed & 0xffffffffu),
                    static_cast<std::uint32_t>(seed >> 32), 0x0eac1eu};
  std::mt19937_64 rng(seq);
  std::normal_distribution<double> normal(0.0, 1.0);
  const double mix = std::sqrt(1.0 - design.rho * design.rho);
  const double p = design.pscore;
  Eigen::RowVectorXd x(2 * J);
  OracleMoments m;
  for (int r = 0; r < draws; ++r) {
    for (int j = 0; j < J; ++j) {
      const double za = normal(rng);
      x[j] = za;
      x[J + j] = design.rho * za + mix * normal(rng);
    }
    const double a = OracleTau(design, x) - design.tau;
    const double h = OracleSigma2(design, 1, x) / p + OracleSigma2(design, 0, x) / (1.0 - p);
    const double a2 = a * a;
    m.mean_a2 += a2;
    m.mean_a4 += a2 * a2;
    m.mean_a2h += a2 * h;
    m.mean_h2 += h * h;
  }
  m.mean_a2 /= draws;
  m.mean_a4 /= draws;
  m.mean_a2h /= draws;
  m.mean_h2 /= draws;
  return m;
}

}  // namespace

double EfficientInfluence(double y, int d, double tau, double mu0, double p, double tau_av) {
  const double dev = tau - tau_av;
  const double correction =
      d == 1 ? (y - mu0 - tau) / p : -(y - mu0) / (1.0 - p);
  return dev * dev + 2.0 * dev * correction;
}

InfluenceEval TwoStepEstimate(const Dataset& ds, const FoldPlan& plan,
                              std::span<const NuisanceModel> models) {
  if (static_cast<int>(models.size()) != plan.K) {
    Fail(ErrorCode::kInvalidArgument, "need one nuisance model per fold");
  }
  const std::size_t n = ds.n();
  if (n < 2) Fail(ErrorCode::kTooFewUnits, "two-step estimate needs n >= 2");
  Eigen::VectorXd tau(n), mu0(n);
  for (std::size_t i = 0; i < n; ++i) {
    const NuisanceModel& m = models[plan.assignment[i]];
    const auto row = ds.x.row(static_cast<Eigen::Index>(i));
    tau[i] = m.PredictTau(row);
    mu0[i] = m.PredictMu0(row);
  }
  InfluenceEval out;
  out.tau_av = tau.mean();
  out.phi.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    out.phi[i] = EfficientInfluence(ds.y[i], ds.d[i], tau[i], mu0[i], ds.pscore[i], out.tau_av);
  }
  out.mean = out.phi.mean();
  out.sample_var = (out.phi.array() - out.mean).square().sum() / static_cast<double>(n - 1);
  return out;
}

ConfidenceInterval TwoStepNaiveCi(double estimate, double sample_var, std::size_t n,
                                  double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0)) Fail(ErrorCode::kInvalidArgument, "alpha must lie in (0, 1)");
  if (sample_var < 0.0 || n == 0) Fail(ErrorCode::kInvalidArgument, "need sample_var >= 0, n > 0");
  const double z = boost::math::quantile(boost::math::normal(), 1.0 - alpha / 2.0);
  const double half = z * std::sqrt(sample_var / static_cast<double>(n));
  ConfidenceInterval ci;
  ci.lo = estimate - half;
  ci.hi = estimate + half;
  ci.alpha = alpha;
  ci.kind = CiKind::kNaiveNormal;
  return ci;
}

double OracleVarianceBound(const SimulationDesign& design, int draws, std::uint64_t seed) {
  const OracleMoments m = SampleOracleMoments(design, draws, seed);
  return (m.mean_a4 - m.mean_a2 * m.mean_a2) + 4.0 * m.mean_a2h;
}

double OracleVarianceUpperBound(const SimulationDesign& design, int draws, std::uint64_t seed) {
  const OracleMoments m = SampleOracleMoments(design, draws, seed);
  const double v = design.v_tau;
  if (v == 0.0) return 0.0;
  const double kappa = std::sqrt(m.mean_a4) / v;
  return kappa * kappa * v * v + 4.0 * kappa * v * std::sqrt(m.mean_h2);
}

}  // namespace vcate
