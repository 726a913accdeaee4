#include "vcate/lasso.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <string>

#include "vcate/errors.h"

namespace vcate {

namespace {

// Centered, unit-variance copy of the design reduced to its Gram matrix.
struct Standardized {
  Eigen::MatrixXd gram;  // Z'Z / n over kept columns
  Eigen::VectorXd corr;  // Z'(y - ybar) / n
  Eigen::VectorXd center;
  Eigen::VectorXd scale;
  std::vector<int> kept;
  std::vector<int> dropped;
  double ybar = 0.0;
  bool constant_y = false;
};

Standardized Standardize(const Eigen::MatrixXd& x, const Eigen::VectorXd& y) {
  const Eigen::Index n = x.rows(), p = x.cols();
  Standardized s;
  s.center = x.colwise().mean().transpose();
  s.scale.resize(p);
  for (Eigen::Index j = 0; j < p; ++j) {
    const double var = (x.col(j).array() - s.center[j]).square().mean();
    s.scale[j] = std::sqrt(var);
    const double magnitude = std::max(1.0, x.col(j).cwiseAbs().maxCoeff());
    if (s.scale[j] > 1e-12 * magnitude) {
      s.kept.push_back(static_cast<int>(j));
    } else {
      s.dropped.push_back(static_cast<int>(j));
    }
  }
  s.ybar = y.mean();
  s.constant_y = (y.array() == y[0]).all();
  const Eigen::Index q = static_cast<Eigen::Index>(s.kept.size());
  Eigen::MatrixXd z(n, q);
  for (Eigen::Index k = 0; k < q; ++k) {
    const int j = s.kept[k];
    z.col(k) = (x.col(j).array() - s.center[j]) / s.scale[j];
  }
  s.gram = z.transpose() * z / static_cast<double>(n);
  s.corr = z.transpose() * (y.array() - s.ybar).matrix() / static_cast<double>(n);
  if (s.constant_y) s.corr.setZero();
  return s;
}

double SoftThreshold(double z, double t) {
  if (z > t) return z - t;
  if (z < -t) return z + t;
  return 0.0;
}

// Covariance-update coordinate descent on
//   (1/2) b'Gb - c'b + lambda |b|_1
// warm-started from `beta`.
void CoordinateDescent(const Standardized& s, double lambda, const LassoOptions& opt,
                       Eigen::VectorXd& beta) {
  const Eigen::Index q = s.gram.rows();
  if (q == 0) return;
  Eigen::VectorXd grad = s.corr - s.gram * beta;
  auto update = [&](Eigen::Index j) {
    const double gjj = s.gram(j, j);
    const double old = beta[j];
    const double fresh = SoftThreshold(grad[j] + gjj * old, lambda) / gjj;
    const double delta = fresh - old;
    if (delta != 0.0) {
      beta[j] = fresh;
      grad.noalias() -= s.gram.col(j) * delta;
    }
    return std::abs(delta);
  };
  std::vector<Eigen::Index> active;
  for (int sweep = 0; sweep < opt.max_sweeps; ++sweep) {
    double max_delta = 0.0;
    for (Eigen::Index j = 0; j < q; ++j) max_delta = std::max(max_delta, update(j));
    if (max_delta < opt.tolerance) return;
    active.clear();
    for (Eigen::Index j = 0; j < q; ++j) {
      if (beta[j] != 0.0) active.push_back(j);
    }
    for (int inner = 0; inner < opt.max_sweeps; ++inner) {
      double inner_delta = 0.0;
      for (Eigen::Index j : active) inner_delta = std::max(inner_delta, update(j));
      if (inner_delta < opt.tolerance) break;
    }
  }
  Fail(ErrorCode::kInternal, "lasso coordinate descent did not converge");
}

LassoFit ToFit(const Standardized& s, const Eigen::VectorXd& beta, double lambda) {
  LassoFit fit;
  const Eigen::Index p = s.center.size();
  fit.coefficients = Eigen::VectorXd::Zero(p);
  fit.center = s.center;
  fit.scale = s.scale;
  fit.dropped_columns = s.dropped;
  fit.constant_response = s.constant_y;
  fit.lambda = lambda;
  double offset = 0.0;
  for (std::size_t k = 0; k < s.kept.size(); ++k) {
    const int j = s.kept[k];
    fit.coefficients[j] = beta[static_cast<Eigen::Index>(k)] / s.scale[j];
    offset += fit.coefficients[j] * s.center[j];
  }
  fit.intercept = s.ybar - offset;
  return fit;
}

double MaxAbs(const Eigen::VectorXd& v) { return v.size() == 0 ? 0.0 : v.cwiseAbs().maxCoeff(); }

std::vector<double> LambdaGrid(double lambda_max, const LassoOptions& opt) {
  std::vector<double> grid(static_cast<std::size_t>(opt.n_lambda));
  if (opt.n_lambda == 1) {
    grid[0] = lambda_max;
    return grid;
  }
  const double log_ratio = std::log(opt.lambda_min_ratio);
  for (int k = 0; k < opt.n_lambda; ++k) {
    grid[k] = lambda_max * std::exp(log_ratio * k / (opt.n_lambda - 1));
  }
  grid[0] = lambda_max;
  return grid;
}

void CheckShapes(const Eigen::MatrixXd& x, const Eigen::VectorXd& y) {
  if (x.rows() != y.size() || x.rows() < 1) {
    Fail(ErrorCode::kInvalidArgument, "lasso design and response sizes differ");
  }
}

}  // namespace

double LassoFit::Predict(const Eigen::Ref<const Eigen::RowVectorXd>& row) const {
  return intercept + row.dot(coefficients);
}

int LassoFit::ActiveCount() const {
  return static_cast<int>((coefficients.array() != 0.0).count());
}

double LambdaMax(const Eigen::MatrixXd& x, const Eigen::VectorXd& y) {
  CheckShapes(x, y);
  return MaxAbs(Standardize(x, y).corr);
}

LassoFit FitLasso(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, double lambda,
                  const LassoOptions& options) {
  return FitLassoPath(x, y, {lambda}, options).front();
}

std::vector<LassoFit> FitLassoPath(const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                                   const std::vector<double>& lambdas,
                                   const LassoOptions& options) {
  CheckShapes(x, y);
  const Standardized s = Standardize(x, y);
  Eigen::VectorXd beta = Eigen::VectorXd::Zero(s.gram.rows());
  std::vector<LassoFit> out;
  out.reserve(lambdas.size());
  for (double lambda : lambdas) {
    if (lambda < 0.0) Fail(ErrorCode::kInvalidArgument, "lasso penalty must be >= 0");
    CoordinateDescent(s, lambda, options, beta);
    out.push_back(ToFit(s, beta, lambda));
  }
  return out;
}

LassoFit FitLassoCv(const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                    const LassoOptions& options) {
  CheckShapes(x, y);
  const Eigen::Index n = x.rows();
  if (options.cv_folds < 2 || n < options.cv_folds) {
    Fail(ErrorCode::kInvalidArgument, "lasso cross-validation needs 2 <= cv_folds <= n, got " +
                                          std::to_string(options.cv_folds) + " folds for n=" +
                                          std::to_string(n));
  }
  const Standardized full = Standardize(x, y);
  if (full.constant_y || full.kept.empty()) {
    LassoFit fit = ToFit(full, Eigen::VectorXd::Zero(full.gram.rows()), 0.0);
    return fit;
  }
  const std::vector<double> grid = LambdaGrid(MaxAbs(full.corr), options);

  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), 0);
  std::seed_seq seq{static_cast<std::uint32_t>(options.seed & 0xffffffffu),
                    static_cast<std::uint32_t>(options.seed >> 32), 0xc0ffeeu};
  std::mt19937_64 rng(seq);
  std::shuffle(order.begin(), order.end(), rng);
  std::vector<int> fold_of(static_cast<std::size_t>(n));
  for (Eigen::Index r = 0; r < n; ++r) fold_of[order[r]] = static_cast<int>(r % options.cv_folds);

  std::vector<double> sse(grid.size(), 0.0);
  for (int f = 0; f < options.cv_folds; ++f) {
    std::vector<Eigen::Index> train, test;
    for (Eigen::Index i = 0; i < n; ++i) (fold_of[i] == f ? test : train).push_back(i);
    const Eigen::MatrixXd x_train = x(train, Eigen::all);
    const Eigen::VectorXd y_train = y(train);
    const Standardized s = Standardize(x_train, y_train);
    Eigen::VectorXd beta = Eigen::VectorXd::Zero(s.gram.rows());
    for (std::size_t l = 0; l < grid.size(); ++l) {
      if (!s.constant_y) CoordinateDescent(s, grid[l], options, beta);
      const LassoFit fit = ToFit(s, beta, grid[l]);
      for (Eigen::Index i : test) {
        const double e = y[i] - fit.Predict(x.row(i));
        sse[l] += e * e;
      }
    }
  }
  std::size_t best = 0;
  for (std::size_t l = 1; l < grid.size(); ++l) {
    if (sse[l] < sse[best]) best = l;
  }
  std::vector<double> path(grid.begin(), grid.begin() + static_cast<std::ptrdiff_t>(best) + 1);
  LassoFit fit = FitLassoPath(x, y, path, options).back();
  fit.lambda_path = grid;
  fit.cv_risk.resize(grid.size());
  for (std::size_t l = 0; l < grid.size(); ++l) fit.cv_risk[l] = sse[l] / static_cast<double>(n);
  return fit;
}

double LassoObjective(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, const LassoFit& fit) {
  const Eigen::VectorXd resid =
      (y.array() - fit.intercept).matrix() - x * fit.coefficients;
  double penalty = 0.0;
  for (Eigen::Index j = 0; j < fit.coefficients.size(); ++j) {
    penalty += fit.scale[j] * std::abs(fit.coefficients[j]);
  }
  return 0.5 * resid.squaredNorm() / static_cast<double>(x.rows()) + fit.lambda * penalty;
}

}  // namespace vcate
