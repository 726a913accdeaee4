#include "vcate/pipeline.h"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <thread>

#include "vcate/errors.h"
#include "vcate/json_util.h"
#include "vcate/welfare.h"

namespace vcate {

namespace {

using json_util::Json;
using json_util::RejectUnknown;
using json_util::Take;

double Median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t m = v.size() / 2;
  return v.size() % 2 == 1 ? v[m] : 0.5 * (v[m - 1] + v[m]);
}

SplitResult RunSplit(const Dataset& ds, const EstimateOptions& options, int split) {
  const std::span<const std::int64_t> clusters =
      ds.cluster_id ? std::span<const std::int64_t>(*ds.cluster_id) : std::span<const std::int64_t>();
  const FoldPlan plan = MakeFolds(ds.n(), options.K, options.seed, split, clusters);
  NuisanceOptions nuisance = options.nuisance;
  nuisance.lasso.seed = options.seed;
  SplitResult out;
  out.split = split;
  std::vector<NuisanceModel> models;
  for (int k = 0; k < plan.K; ++k) models.push_back(FitNuisance(ds, plan, k, nuisance));
  for (int k = 0; k < plan.K; ++k) {
    out.folds.push_back(EstimateFold(ds, plan, k, models[k]));
    out.cis.push_back(DegenerateAwareCi(out.folds.back(), options.alpha / 2.0, options.grid));
  }
  out.ensemble = EnsembleVcate(out.folds);
  double sum = 0.0;
  for (std::size_t i = 0; i < ds.n(); ++i) {
    const NuisanceModel& m = models[plan.assignment[i]];
    const auto x = ds.x.row(static_cast<Eigen::Index>(i));
    const double mu0 = m.PredictMu0(x), mu1 = m.PredictMu1(x), p = ds.pscore[i];
    sum += mu1 - mu0 +
           (ds.d[i] == 1 ? (ds.y[i] - mu1) / p : -(ds.y[i] - mu0) / (1.0 - p));
  }
  out.ate = sum / static_cast<double>(ds.n());
  return out;
}

Json Nullable(double v) { return std::isfinite(v) ? Json(v) : Json(nullptr); }

Json Pair(double lo, double hi) { return Json::array({Nullable(lo), Nullable(hi)}); }

Json FoldJson(const FoldEstimate& fe, const ConfidenceInterval& ci) {
  Json j;
  j["fold"] = fe.fold + 1;
  j["n_k"] = fe.n_k;
  j["degenerate"] = fe.degenerate;
  j["theta"] = Json::array({fe.theta[0], fe.theta[1], fe.theta[2], fe.theta[3]});
  j["v_x"] = fe.v_x;
  j["v_tau"] = fe.v_tau;
  j["tau_bar"] = fe.tau_bar;
  j["omega"] = Json::array({Json::array({fe.omega(0, 0), fe.omega(0, 1)}),
                            Json::array({fe.omega(1, 0), fe.omega(1, 1)})});
  j["omega_floored"] = fe.omega_floored;
  j["clustered"] = fe.clustered;
  j["ci"] = Pair(ci.lo, ci.hi);
  j["ci_alpha"] = ci.alpha;
  j["ci_kind"] = CiKindName(ci.kind);
  j["ci_hull"] = ci.hull;
  return j;
}

}  // namespace

ReportUnits ParseUnits(const std::string& name) {
  if (name == "variance") return ReportUnits::kVariance;
  if (name == "sd") return ReportUnits::kSd;
  if (name == "sd_normalized_by_control_sd") return ReportUnits::kSdNormalized;
  Fail(ErrorCode::kConfigError, "unknown units '" + name + "'");
}

const char* UnitsName(ReportUnits units) {
  switch (units) {
    case ReportUnits::kVariance: return "variance";
    case ReportUnits::kSd: return "sd";
    case ReportUnits::kSdNormalized: return "sd_normalized_by_control_sd";
  }
  return "unknown";
}

EstimateOptions ParseEstimateOptions(const std::string& json_text, EstimateOptions base) {
  const Json j = json_util::Parse(json_text, "estimation options");
  RejectUnknown(j, {"K", "n_splits", "alpha", "seed", "delta", "threads", "units", "first_stage",
                    "lasso", "grid"},
                "estimation options");
  Take(j, "K", base.K);
  Take(j, "n_splits", base.n_splits);
  Take(j, "alpha", base.alpha);
  Take(j, "seed", base.seed);
  Take(j, "delta", base.delta);
  Take(j, "threads", base.threads);
  if (j.contains("units")) {
    std::string units;
    Take(j, "units", units);
    base.units = ParseUnits(units);
  }
  if (j.contains("first_stage")) {
    std::string method;
    Take(j, "first_stage", method);
    base.nuisance.method = ParseNuisanceMethod(method);
    if (base.nuisance.method == NuisanceMethod::kOracle ||
        base.nuisance.method == NuisanceMethod::kOracleDirection) {
      Fail(ErrorCode::kConfigError, "oracle first stages are only available in simulations");
    }
  }
  if (j.contains("lasso")) {
    const Json& l = j.at("lasso");
    RejectUnknown(l, {"n_lambda", "lambda_min_ratio", "cv_folds"}, "lasso");
    Take(l, "n_lambda", base.nuisance.lasso.n_lambda);
    Take(l, "lambda_min_ratio", base.nuisance.lasso.lambda_min_ratio);
    Take(l, "cv_folds", base.nuisance.lasso.cv_folds);
  }
  if (j.contains("grid")) {
    const Json& g = j.at("grid");
    RejectUnknown(g, {"points", "cap_sds", "tol_rel", "max_doublings"}, "grid");
    Take(g, "points", base.grid.points);
    Take(g, "cap_sds", base.grid.cap_sds);
    Take(g, "tol_rel", base.grid.tol_rel);
    Take(g, "max_doublings", base.grid.max_doublings);
  }
  if (!(base.alpha > 0.0 && base.alpha < 1.0)) Fail(ErrorCode::kConfigError, "alpha must lie in (0, 1)");
  if (base.K < 2) Fail(ErrorCode::kConfigError, "K must be >= 2");
  if (base.n_splits < 1) Fail(ErrorCode::kConfigError, "n_splits must be >= 1");
  if (!(base.delta > 0.0 && base.delta < 0.5)) Fail(ErrorCode::kConfigError, "delta must lie in (0, 0.5)");
  if (base.nuisance.lasso.n_lambda < 1 || base.nuisance.lasso.cv_folds < 2 ||
      !(base.nuisance.lasso.lambda_min_ratio > 0.0 && base.nuisance.lasso.lambda_min_ratio < 1.0)) {
    Fail(ErrorCode::kConfigError, "lasso needs n_lambda >= 1, cv_folds >= 2, 0 < lambda_min_ratio < 1");
  }
  if (base.grid.points < 2 || !(base.grid.cap_sds > 0.0) || !(base.grid.tol_rel > 0.0)) {
    Fail(ErrorCode::kConfigError, "grid needs points >= 2, cap_sds > 0, tol_rel > 0");
  }
  return base;
}

EstimateResult RunEstimate(const Dataset& ds, const EstimateOptions& options) {
  ValidateDataset(ds, options.delta);
  if (ds.n() < 2 * static_cast<std::size_t>(std::max(options.K, 1))) {
    Fail(ErrorCode::kTooFewUnits, "need n >= 2K rows after missing-value deletion");
  }
  EstimateResult r;
  r.options = options;
  r.n = ds.n();
  r.p = ds.p();
  r.clustered = ds.clustered();
  r.splits.resize(static_cast<std::size_t>(options.n_splits));

  std::atomic<int> next{0};
  std::vector<std::string> errors(r.splits.size());
  std::vector<ErrorCode> codes(r.splits.size(), ErrorCode::kOk);
  auto worker = [&] {
    for (int s = next++; s < options.n_splits; s = next++) {
      try {
        r.splits[s] = RunSplit(ds, options, s);
      } catch (const Error& e) {
        codes[s] = e.code();
        errors[s] = e.what();
      }
    }
  };
  if (options.threads <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < options.threads; ++t) pool.emplace_back(worker);
    for (std::thread& t : pool) t.join();
  }
  for (std::size_t s = 0; s < codes.size(); ++s) {
    if (codes[s] != ErrorCode::kOk) throw Error(codes[s], errors[s]);
  }

  std::vector<double> ensembles, ates;
  std::vector<ConfidenceInterval> cis;
  for (const SplitResult& s : r.splits) {
    ensembles.push_back(s.ensemble);
    ates.push_back(s.ate);
    cis.insert(cis.end(), s.cis.begin(), s.cis.end());
    for (const FoldEstimate& fe : s.folds) r.degenerate_folds += fe.degenerate ? 1 : 0;
  }
  r.point = Median(ensembles);
  r.ate = Median(ates);
  r.ci = MultifoldCi(cis, options.alpha);

  double sum = 0.0, sum_sq = 0.0;
  int controls = 0;
  for (std::size_t i = 0; i < ds.n(); ++i) {
    if (ds.d[i] != 0) continue;
    ++controls;
    sum += ds.y[i];
  }
  const double mean = controls > 0 ? sum / controls : 0.0;
  for (std::size_t i = 0; i < ds.n(); ++i) {
    if (ds.d[i] == 0) sum_sq += (ds.y[i] - mean) * (ds.y[i] - mean);
  }
  r.control_sd = controls > 1 ? std::sqrt(sum_sq / (controls - 1)) : 0.0;
  return r;
}

std::string EstimateResult::EstimateJson() const {
  const double scale = control_sd > 0.0 ? control_sd : NAN;
  const double sd = std::sqrt(point);
  Json j;
  j["command"] = "estimate";
  j["n"] = n;
  j["p"] = p;
  j["K"] = options.K;
  j["n_splits"] = options.n_splits;
  j["alpha"] = options.alpha;
  j["seed"] = options.seed;
  j["first_stage"] = NuisanceMethodName(options.nuisance.method);
  j["clustered"] = clustered;
  j["units"] = UnitsName(options.units);

  const ConfidenceInterval sd_ci = SqrtCi(ci);
  double est = point, lo = ci.lo, hi = ci.hi;
  if (options.units == ReportUnits::kSd) {
    est = sd;
    lo = sd_ci.lo;
    hi = sd_ci.hi;
  } else if (options.units == ReportUnits::kSdNormalized) {
    est = sd / scale;
    lo = sd_ci.lo / scale;
    hi = sd_ci.hi / scale;
  }
  j["estimate"] = Nullable(est);
  j["ci"] = Pair(lo, hi);
  j["ci_kind"] = CiKindName(ci.kind);
  j["ci_hull"] = ci.hull;

  Json all;
  all["variance"] = {{"estimate", point}, {"ci", Pair(ci.lo, ci.hi)}};
  all["sd"] = {{"estimate", sd}, {"ci", Pair(sd_ci.lo, sd_ci.hi)}};
  all["sd_normalized_by_control_sd"] = {{"estimate", Nullable(sd / scale)},
                                        {"ci", Pair(sd_ci.lo / scale, sd_ci.hi / scale)}};
  j["all_units"] = all;

  j["ate"] = ate;
  j["control_sd"] = control_sd;
  j["ate_normalized"] = Nullable(ate / scale);
  Json w;
  w["simple"] = WelfareBoundSimple(point);
  w["general"] = WelfareBoundGeneral(ate, point);
  if (control_sd > 0.0) {
    const double v_norm = point / (control_sd * control_sd);
    w["simple_normalized"] = WelfareBoundSimple(v_norm);
    w["general_normalized"] = WelfareBoundGeneral(ate / control_sd, v_norm);
  } else {
    w["simple_normalized"] = nullptr;
    w["general_normalized"] = nullptr;
  }
  j["welfare"] = w;
  j["degenerate_folds"] = degenerate_folds;
  j["total_folds"] = options.K * options.n_splits;

  Json splits_json = Json::array();
  for (const SplitResult& s : splits) {
    Json js;
    js["split"] = s.split + 1;
    js["ensemble"] = s.ensemble;
    js["ate"] = s.ate;
    Json folds = Json::array();
    for (std::size_t k = 0; k < s.folds.size(); ++k) folds.push_back(FoldJson(s.folds[k], s.cis[k]));
    js["folds"] = folds;
    splits_json.push_back(js);
  }
  j["splits"] = splits_json;
  return j.dump(2) + "\n";
}

std::string EstimateResult::TestJson() const {
  Json j;
  j["command"] = "test";
  j["n"] = n;
  j["p"] = p;
  j["K"] = options.K;
  j["n_splits"] = options.n_splits;
  j["alpha"] = options.alpha;
  j["seed"] = options.seed;
  j["first_stage"] = NuisanceMethodName(options.nuisance.method);
  j["clustered"] = clustered;
  Json folds = Json::array();
  std::vector<double> pvalues;
  int rejections = 0;
  for (const SplitResult& s : splits) {
    for (const FoldEstimate& fe : s.folds) {
      const HomogeneityResult h = HomogeneityTest(fe, options.alpha);
      Json jf;
      jf["split"] = s.split + 1;
      jf["fold"] = fe.fold + 1;
      jf["degenerate"] = fe.degenerate;
      jf["statistic"] = h.statistic;
      jf["pvalue"] = h.pvalue;
      jf["reject"] = h.reject;
      if (p == 1) jf["crump"] = CrumpStatistic(fe);
      folds.push_back(jf);
      pvalues.push_back(h.pvalue);
      rejections += h.reject ? 1 : 0;
    }
  }
  j["folds"] = folds;
  j["fold_rejections"] = rejections;
  j["median_pvalue"] = Median(pvalues);
  j["multifold"] = {{"ci", Pair(ci.lo, ci.hi)}, {"alpha", ci.alpha}, {"reject", ci.lo > 0.0}};
  return j.dump(2) + "\n";
}

}  // namespace vcate
