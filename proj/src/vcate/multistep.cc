#include "vcate/multistep.h"

#include <cmath>
#include <map>
#include <string>

#include "vcate/dml_twostep.h"
#include "vcate/errors.h"

namespace vcate {

namespace {

// lambda-weighted Gram of Pi w (fourth column scaled by v_x^{-1/2}), and its
// inverse's fourth row.
struct NormalizedDesign {
  Eigen::MatrixXd w_tilde;
  Eigen::RowVector4d a;
};

NormalizedDesign Normalize(const FoldRegressors& reg) {
  if (!(reg.v_x > 0.0)) Fail(ErrorCode::kSingularJ, "sandwich covariance needs v_x > 0");
  NormalizedDesign nd;
  nd.w_tilde = reg.w;
  nd.w_tilde.col(3) /= std::sqrt(reg.v_x);
  const double n = static_cast<double>(reg.n());
  const Eigen::Matrix4d j4 =
      nd.w_tilde.transpose() * reg.lambda.asDiagonal() * nd.w_tilde / n;
  Eigen::FullPivLU<Eigen::Matrix4d> lu(j4);
  if (!lu.isInvertible()) Fail(ErrorCode::kSingularJ, "normalized weighted Gram is singular");
  nd.a = lu.inverse().row(3);
  return nd;
}

// Per-unit score [lambda U a'w~, T].
Eigen::MatrixXd Scores(const FoldRegressors& reg, const Eigen::Vector4d& theta) {
  const NormalizedDesign nd = Normalize(reg);
  const Eigen::VectorXd resid = reg.y - reg.w * theta;
  const Eigen::VectorXd proj = nd.w_tilde * nd.a.transpose();
  Eigen::MatrixXd s(reg.n(), 2);
  s.col(0) = reg.lambda.cwiseProduct(resid).cwiseProduct(proj);
  s.col(1) = reg.s.array().square() / reg.v_x - 1.0;
  return s;
}

Eigen::Matrix2d Symmetrize(const Eigen::Matrix2d& m) {
  Eigen::Matrix2d out = m;
  out(1, 0) = out(0, 1);
  return out;
}

}  // namespace

FoldRegressors BuildRegressors(const Dataset& ds, const FoldPlan& plan, int k,
                               const NuisanceModel& model) {
  if (k < 0 || k >= plan.K) Fail(ErrorCode::kInvalidArgument, "fold index out of range");
  const auto& rows = plan.members.at(k);
  const Eigen::Index m = static_cast<Eigen::Index>(rows.size());
  if (m == 0) Fail(ErrorCode::kTooFewUnits, "fold " + std::to_string(k + 1) + " is empty");
  FoldRegressors reg;
  reg.w.resize(m, 4);
  reg.lambda.resize(m);
  reg.y.resize(m);
  reg.s.resize(m);
  reg.tau_hat.resize(m);
  reg.mu0_hat.resize(m);
  reg.pscore.resize(m);
  reg.d.resize(rows.size());
  if (ds.cluster_id) reg.cluster_id.resize(rows.size());
  for (Eigen::Index r = 0; r < m; ++r) {
    const std::size_t i = rows[r];
    const auto x = ds.x.row(static_cast<Eigen::Index>(i));
    reg.tau_hat[r] = model.PredictTau(x);
    reg.mu0_hat[r] = model.PredictMu0(x);
    reg.pscore[r] = ds.pscore[i];
    reg.y[r] = ds.y[i];
    reg.d[r] = ds.d[i];
    if (ds.cluster_id) reg.cluster_id[r] = (*ds.cluster_id)[i];
  }
  reg.degenerate = (reg.tau_hat.array() == reg.tau_hat[0]).all();
  reg.tau_bar = reg.degenerate ? reg.tau_hat[0] : reg.tau_hat.mean();
  if (reg.degenerate) {
    reg.s.setZero();
  } else {
    reg.s = reg.tau_hat.array() - reg.tau_bar;
  }
  reg.v_x = reg.s.squaredNorm() / static_cast<double>(m);
  for (Eigen::Index r = 0; r < m; ++r) {
    const double p = reg.pscore[r];
    const double dev = reg.d[r] - p;
    reg.w(r, 0) = 1.0;
    reg.w(r, 1) = reg.mu0_hat[r] + p * reg.tau_hat[r];
    reg.w(r, 2) = dev;
    reg.w(r, 3) = dev * reg.s[r];
    reg.lambda[r] = 1.0 / (p * (1.0 - p));
  }
  return reg;
}

Eigen::Vector4d WlsTheta(const Eigen::MatrixXd& w, const Eigen::VectorXd& lambda,
                         const Eigen::VectorXd& y) {
  if (w.cols() != 4 || w.rows() != y.size() || lambda.size() != y.size()) {
    Fail(ErrorCode::kInvalidArgument, "regressor, weight and outcome sizes differ");
  }
  const Eigen::VectorXd root = lambda.cwiseSqrt();
  Eigen::MatrixXd a = root.asDiagonal() * w;
  const Eigen::VectorXd b = root.cwiseProduct(y);
  Eigen::Vector4d scale;
  for (int j = 0; j < 4; ++j) {
    scale[j] = a.col(j).norm();
    if (!(scale[j] > 0.0)) {
      Fail(ErrorCode::kSingularGram, "regressor " + std::to_string(j + 1) + " is identically zero");
    }
    a.col(j) /= scale[j];
  }
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(a);
  qr.setThreshold(1e-10);
  if (qr.rank() < 4) Fail(ErrorCode::kSingularGram, "weighted Gram matrix is singular");
  const Eigen::Vector4d theta = qr.solve(b);
  return theta.cwiseQuotient(scale);
}

Eigen::Matrix2d SandwichOmega(const FoldRegressors& reg, const Eigen::Vector4d& theta) {
  const Eigen::MatrixXd s = Scores(reg, theta);
  return Symmetrize(s.transpose() * s / static_cast<double>(reg.n()));
}

Eigen::Matrix2d ClusteredOmega(const FoldRegressors& reg, const Eigen::Vector4d& theta,
                               std::span<const std::int64_t> cluster_id) {
  if (static_cast<Eigen::Index>(cluster_id.size()) != reg.n()) {
    Fail(ErrorCode::kInvalidArgument, "cluster ids must match the fold size");
  }
  const Eigen::MatrixXd s = Scores(reg, theta);
  std::map<std::int64_t, Eigen::RowVector2d> sums;
  for (Eigen::Index r = 0; r < reg.n(); ++r) {
    auto [it, fresh] = sums.try_emplace(cluster_id[r], Eigen::RowVector2d::Zero());
    it->second += s.row(r);
  }
  if (sums.size() < 2) Fail(ErrorCode::kSingularJ, "clustered covariance needs >= 2 clusters");
  Eigen::Matrix2d h = Eigen::Matrix2d::Zero();
  for (const auto& [id, sc] : sums) h += sc.transpose() * sc;
  return Symmetrize(h / static_cast<double>(reg.n()));
}

OmegaResult FloorOmega(const Eigen::Matrix2d& omega) {
  OmegaResult out;
  out.omega = omega;
  const double trace = omega.trace();
  if (!(trace > 0.0)) return out;
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> eig(omega, Eigen::EigenvaluesOnly);
  if (eig.eigenvalues()[0] < 1e-12 * trace) {
    out.omega += 1e-10 * trace * Eigen::Matrix2d::Identity();
    out.floored = true;
  }
  return out;
}

FoldEstimate EstimateFold(const FoldRegressors& reg, int k, int split) {
  FoldEstimate fe;
  fe.fold = k;
  fe.split = split;
  fe.n_k = static_cast<std::size_t>(reg.n());
  fe.tau_bar = reg.tau_bar;
  fe.clustered = !reg.cluster_id.empty();
  if (reg.degenerate || reg.v_x == 0.0) {
    fe.degenerate = true;
    return fe;
  }
  fe.v_x = reg.v_x;
  fe.theta = WlsTheta(reg.w, reg.lambda, reg.y);
  fe.v_tau = fe.theta[3] * fe.theta[3] * fe.v_x;
  const Eigen::Matrix2d raw = fe.clustered ? ClusteredOmega(reg, fe.theta, reg.cluster_id)
                                           : SandwichOmega(reg, fe.theta);
  const OmegaResult floored = FloorOmega(raw);
  fe.omega = floored.omega;
  fe.omega_floored = floored.floored;
  return fe;
}

FoldEstimate EstimateFold(const Dataset& ds, const FoldPlan& plan, int k,
                          const NuisanceModel& model) {
  return EstimateFold(BuildRegressors(ds, plan, k, model), k, plan.split_id);
}

double EnsembleVcate(std::span<const FoldEstimate> folds) {
  if (folds.empty()) Fail(ErrorCode::kInvalidArgument, "ensemble needs at least one fold");
  double sum = 0.0;
  for (const FoldEstimate& fe : folds) sum += fe.v_tau;
  return sum / static_cast<double>(folds.size());
}

double InfluenceIdentityCheck(const FoldRegressors& reg, const FoldEstimate& fe) {
  const double c1 = fe.theta[0], c2 = fe.theta[1], b1 = fe.theta[2], b2 = fe.theta[3];
  const Eigen::VectorXd tau = (b1 + b2 * reg.s.array()).matrix();
  const double tau_av = tau.mean();
  double sum = 0.0;
  for (Eigen::Index r = 0; r < reg.n(); ++r) {
    const double mu0 = c1 + c2 * reg.w(r, 1) - reg.pscore[r] * tau[r];
    sum += EfficientInfluence(reg.y[r], reg.d[r], tau[r], mu0, reg.pscore[r], tau_av);
  }
  return std::abs(fe.v_tau - sum / static_cast<double>(reg.n()));
}

}  // namespace vcate
