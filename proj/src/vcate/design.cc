#include "vcate/design.h"

#include <cmath>
#include <random>
#include <string>

#include "vcate/errors.h"

namespace vcate {

Eigen::VectorXd SimulationDesign::SquaredWeights() const {
  Eigen::VectorXd w(J);
  const double norm = (1.0 - decay) / (1.0 - std::pow(decay, J));
  for (int j = 0; j < J; ++j) w[j] = norm * std::pow(decay, j);
  return w;
}

Eigen::VectorXd SimulationDesign::Direction() const { return SquaredWeights().cwiseSqrt(); }

Eigen::VectorXd SimulationDesign::Beta0() const { return Direction() * std::sqrt(v_mu); }

Eigen::VectorXd SimulationDesign::BetaTau() const { return Direction() * std::sqrt(v_tau); }

Eigen::VectorXd SimulationDesign::Kappa() const {
  return Direction() * std::sqrt(sigma2 - sigma_tilde2);
}

void SimulationDesign::Validate() const {
  auto bad = [](const std::string& what) { Fail(ErrorCode::kConfigError, "design: " + what); };
  if (J < 1) bad("J must be >= 1");
  if (!(rho > -1.0 && rho < 1.0)) bad("rho must lie in (-1, 1)");
  if (!(decay > 0.0 && decay < 1.0)) bad("decay must lie in (0, 1)");
  if (v_mu < 0.0 || v_tau < 0.0) bad("v_mu and v_tau must be >= 0");
  if (sigma_tilde2 < 0.0 || sigma2 < sigma_tilde2) bad("need 0 <= sigma_tilde2 <= sigma2");
  if (!(pscore > 0.0 && pscore < 1.0)) bad("pscore must lie in (0, 1)");
  if (n < 2 * K || K < 2) bad("need K >= 2 and n >= 2K");
}

SimulatedSample GenSample(const SimulationDesign& design, std::uint64_t seed) {
  design.Validate();
  const int J = design.J;
  const int n = design.n;
  std::seed_seq seq{static_cast<std::uint32_t>(seed & 0xffffffffu),
                    static_cast<std::uint32_t>(seed >> 32), 0xd47au};
  std::mt19937_64 rng(seq);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::bernoulli_distribution coin(design.pscore);

  const Eigen::VectorXd b0 = design.Beta0();
  const Eigen::VectorXd bt = design.BetaTau();
  const Eigen::VectorXd kappa = design.Kappa();
  const double mix = std::sqrt(1.0 - design.rho * design.rho);

  SimulatedSample s;
  Dataset& ds = s.data;
  ds.x.resize(n, 2 * J);
  ds.y.resize(n);
  ds.d.resize(n);
  ds.pscore = Eigen::VectorXd::Constant(n, design.pscore);
  s.y0.resize(n);
  s.y1.resize(n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < J; ++j) {
      const double za = normal(rng);
      const double zb = normal(rng);
      ds.x(i, j) = za;
      ds.x(i, J + j) = design.rho * za + mix * zb;
    }
    const double u0 = normal(rng);
    const double u1 = normal(rng);
    const int d = coin(rng) ? 1 : 0;
    const auto x0 = ds.x.row(i).head(J);
    const auto x1 = ds.x.row(i).tail(J);
    const double k0 = x0.dot(kappa);
    const double k1 = x1.dot(kappa);
    const double base = design.c + x0.dot(b0);
    s.y0[i] = base + u0 * std::sqrt(design.sigma_tilde2 + k0 * k0);
    s.y1[i] = base + design.tau + x1.dot(bt) + u1 * std::sqrt(design.sigma_tilde2 + k1 * k1);
    ds.d[i] = d;
    ds.y[i] = d == 1 ? s.y1[i] : s.y0[i];
  }
  return s;
}

Dataset GenDataset(const SimulationDesign& design, std::uint64_t seed) {
  return GenSample(design, seed).data;
}

double TrueVcate(const SimulationDesign& design) { return design.v_tau; }

double OracleMu0(const SimulationDesign& design, const Eigen::Ref<const Eigen::RowVectorXd>& x) {
  return design.c + x.head(design.J).dot(design.Beta0());
}

double OracleMu1(const SimulationDesign& design, const Eigen::Ref<const Eigen::RowVectorXd>& x) {
  return OracleMu0(design, x) + OracleTau(design, x);
}

double OracleTau(const SimulationDesign& design, const Eigen::Ref<const Eigen::RowVectorXd>& x) {
  return design.tau + x.tail(design.J).dot(design.BetaTau());
}

double OracleSigma2(const SimulationDesign& design, int arm,
                    const Eigen::Ref<const Eigen::RowVectorXd>& x) {
  const double k = (arm == 1 ? x.tail(design.J) : x.head(design.J)).dot(design.Kappa());
  return design.sigma_tilde2 + k * k;
}

double OracleVcateForCovariates(const SimulationDesign& design, std::span<const int> columns) {
  const int J = design.J;
  const int p = 2 * J;
  Eigen::MatrixXd cov = Eigen::MatrixXd::Identity(p, p);
  for (int j = 0; j < J; ++j) {
    cov(j, J + j) = design.rho;
    cov(J + j, j) = design.rho;
  }
  Eigen::VectorXd w = Eigen::VectorXd::Zero(p);
  w.tail(J) = design.BetaTau();
  if (columns.empty()) return 0.0;
  std::vector<int> cols(columns.begin(), columns.end());
  for (int c : cols) {
    if (c < 0 || c >= p) Fail(ErrorCode::kInvalidArgument, "covariate index out of range");
  }
  const Eigen::MatrixXd cov_ss = cov(cols, cols);
  const Eigen::VectorXd cov_sa = (cov * w)(cols);
  return cov_sa.dot(cov_ss.ldlt().solve(cov_sa));
}

}  // namespace vcate
