#include "vcate/simulation.h"

#include <atomic>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>
#include <thread>

#include "vcate/errors.h"
#include "vcate/json_util.h"

namespace vcate {

namespace {

using json_util::Json;
using json_util::RejectUnknown;
using json_util::Take;

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::uint64_t SplitMix(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

std::string Num(double v) {
  if (std::isnan(v)) return "";
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.10g", v);
  return buf;
}

std::string FormatV(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%g", v);
  return buf;
}

std::string CellId(const SimulationDesign& d, NuisanceMethod m) {
  return "n" + std::to_string(d.n) + "_p" + std::to_string(d.p()) + "_v" + FormatV(d.v_tau) +
         "_" + NuisanceMethodName(m);
}

struct Accumulator {
  int count = 0;
  double sum = 0.0;
  double sum_sq_err = 0.0;
  double sum_sq_err2 = 0.0;

  void Add(double estimate, double truth) {
    ++count;
    sum += estimate;
    const double e2 = (estimate - truth) * (estimate - truth);
    sum_sq_err += e2;
    sum_sq_err2 += e2 * e2;
  }
};

struct Rate {
  int count = 0;
  int hits = 0;
  void Add(bool hit) {
    ++count;
    hits += hit ? 1 : 0;
  }
  double value() const { return count == 0 ? kNaN : static_cast<double>(hits) / count; }
  double se() const {
    if (count == 0) return kNaN;
    const double p = value();
    return std::sqrt(p * (1.0 - p) / count);
  }
};

MetricRow BlankRow(const ExperimentCell& cell, const std::string& estimator,
                   const std::string& method, int reps, int failures) {
  MetricRow row;
  row.cell_id = cell.id;
  row.estimator = estimator;
  row.method = method;
  row.n = cell.design.n;
  row.p = cell.design.p();
  row.v_tau = cell.design.v_tau;
  row.nuisance = NuisanceMethodName(cell.nuisance);
  row.reps = reps;
  row.failures = failures;
  row.mean_estimate = row.bias = row.rmse = row.rmse_se = kNaN;
  row.coverage = row.coverage_se = row.rejection_rate = row.rejection_se = kNaN;
  row.below_rate = row.below_se = row.mean_ci_length = row.degenerate_rate = kNaN;
  return row;
}

void FillPoint(MetricRow& row, const Accumulator& acc, double truth) {
  if (acc.count == 0) return;
  const double n = acc.count;
  const double mse = acc.sum_sq_err / n;
  row.mean_estimate = acc.sum / n;
  row.bias = row.mean_estimate - truth;
  row.rmse = std::sqrt(mse);
  const double var_sq = acc.count > 1 ? (acc.sum_sq_err2 / n - mse * mse) * n / (n - 1) : 0.0;
  row.rmse_se = row.rmse > 0.0 ? std::sqrt(std::max(0.0, var_sq) / n) / (2.0 * row.rmse) : 0.0;
}

void FillInterval(MetricRow& row, const std::vector<const ConfidenceInterval*>& cis, double truth) {
  Rate cover, reject, below;
  double length = 0.0;
  for (const ConfidenceInterval* ci : cis) {
    cover.Add(ci->Contains(truth));
    reject.Add(ci->lo > 0.0);
    below.Add(truth < ci->lo);
    length += ci->length();
  }
  row.coverage = cover.value();
  row.coverage_se = cover.se();
  row.rejection_rate = reject.value();
  row.rejection_se = reject.se();
  row.below_rate = below.value();
  row.below_se = below.se();
  row.mean_ci_length = cis.empty() ? kNaN : length / static_cast<double>(cis.size());
}

std::vector<MetricRow> Summarize(const ExperimentCell& cell, const std::vector<Replication>& reps,
                                 const ExperimentConfig& config) {
  const double truth = TrueVcate(cell.design);
  int failures = 0;
  Accumulator ms, ts, oracle;
  std::vector<const ConfidenceInterval*> single, multi, naive;
  Rate single_degenerate, multi_degenerate;
  for (const Replication& r : reps) {
    if (r.failed) {
      ++failures;
      continue;
    }
    ms.Add(r.multistep, truth);
    single.push_back(&r.single_fold);
    multi.push_back(&r.multifold);
    single_degenerate.Add(r.folds.front().degenerate);
    for (const FoldEstimate& fe : r.folds) multi_degenerate.Add(fe.degenerate);
    if (config.twostep) {
      ts.Add(r.twostep, truth);
      naive.push_back(&r.naive);
    }
    if (config.oracle) oracle.Add(r.oracle, truth);
  }
  const int total = static_cast<int>(reps.size());
  std::vector<MetricRow> rows;
  MetricRow row = BlankRow(cell, "multistep", "point", total, failures);
  FillPoint(row, ms, truth);
  row.degenerate_rate = multi_degenerate.value();
  rows.push_back(row);
  row = BlankRow(cell, "multistep", "single_fold", total, failures);
  FillInterval(row, single, truth);
  row.degenerate_rate = single_degenerate.value();
  rows.push_back(row);
  row = BlankRow(cell, "multistep", "multifold", total, failures);
  FillInterval(row, multi, truth);
  row.degenerate_rate = multi_degenerate.value();
  rows.push_back(row);
  if (config.twostep) {
    row = BlankRow(cell, "twostep", "point", total, failures);
    FillPoint(row, ts, truth);
    rows.push_back(row);
    row = BlankRow(cell, "twostep", "naive", total, failures);
    FillInterval(row, naive, truth);
    rows.push_back(row);
  }
  if (config.oracle) {
    row = BlankRow(cell, "oracle", "point", total, failures);
    FillPoint(row, oracle, truth);
    rows.push_back(row);
  }
  return rows;
}

Json DesignJson(const SimulationDesign& d) {
  Json j;
  j["J"] = d.J;
  j["rho"] = d.rho;
  j["decay"] = d.decay;
  j["v_mu"] = d.v_mu;
  j["v_tau"] = d.v_tau;
  j["tau"] = d.tau;
  j["sigma2"] = d.sigma2;
  j["sigma_tilde2"] = d.sigma_tilde2;
  j["c"] = d.c;
  j["pscore"] = d.pscore;
  j["n"] = d.n;
  j["K"] = d.K;
  return j;
}

void ApplyDesign(const Json& j, SimulationDesign& d) {
  RejectUnknown(j, {"J", "dim", "rho", "decay", "v_mu", "v_tau", "tau", "sigma2", "sigma_tilde2",
                    "c", "pscore", "n", "K"},
                "design");
  Take(j, "J", d.J);
  if (j.contains("dim")) {
    int dim = 0;
    Take(j, "dim", dim);
    if (dim < 2 || dim % 2 != 0) Fail(ErrorCode::kConfigError, "dim must be an even number >= 2");
    d.J = dim / 2;
  }
  Take(j, "rho", d.rho);
  Take(j, "decay", d.decay);
  Take(j, "v_mu", d.v_mu);
  Take(j, "v_tau", d.v_tau);
  Take(j, "tau", d.tau);
  Take(j, "sigma2", d.sigma2);
  Take(j, "sigma_tilde2", d.sigma_tilde2);
  Take(j, "c", d.c);
  Take(j, "pscore", d.pscore);
  Take(j, "n", d.n);
  Take(j, "K", d.K);
}

std::vector<ExperimentCell> Grid(const SimulationDesign& base, const std::vector<int>& ns,
                                 const std::vector<int>& dims, const std::vector<double>& vs,
                                 const std::vector<NuisanceMethod>& methods) {
  std::vector<ExperimentCell> cells;
  for (NuisanceMethod m : methods) {
    for (int dim : dims) {
      for (int n : ns) {
        for (double v : vs) {
          ExperimentCell cell;
          cell.design = base;
          cell.design.n = n;
          cell.design.J = dim / 2;
          cell.design.v_tau = v;
          cell.nuisance = m;
          cell.id = CellId(cell.design, m);
          cells.push_back(cell);
        }
      }
    }
  }
  return cells;
}

}  // namespace

std::uint64_t ReplicationSeed(std::uint64_t seed, int cell, int rep) {
  return SplitMix(SplitMix(SplitMix(seed) ^ static_cast<std::uint64_t>(cell)) ^
                  static_cast<std::uint64_t>(rep));
}

Replication RunReplication(const ExperimentCell& cell, std::uint64_t seed,
                           const ExperimentConfig& config) {
  Replication r;
  r.seed = seed;
  try {
    const SimulationDesign& design = cell.design;
    const Dataset ds = GenDataset(design, seed);
    const FoldPlan plan = MakeFolds(ds.n(), design.K, seed);
    NuisanceOptions options;
    options.method = cell.nuisance;
    options.lasso = config.lasso;
    options.lasso.seed = seed;
    options.design = design;
    std::vector<NuisanceModel> models;
    for (int k = 0; k < plan.K; ++k) models.push_back(FitNuisance(ds, plan, k, options));
    for (int k = 0; k < plan.K; ++k) {
      r.folds.push_back(EstimateFold(ds, plan, k, models[k]));
      r.degenerate_folds += r.folds.back().degenerate ? 1 : 0;
    }
    r.multistep = EnsembleVcate(r.folds);
    r.single_fold = DegenerateAwareCi(r.folds.front(), config.alpha, config.grid);
    for (const FoldEstimate& fe : r.folds) {
      r.fold_cis_half.push_back(DegenerateAwareCi(fe, config.alpha / 2.0, config.grid));
      r.tests.push_back(HomogeneityTest(fe, config.alpha));
    }
    r.multifold = MultifoldCi(r.fold_cis_half, config.alpha);
    if (config.twostep) {
      const InfluenceEval ts = TwoStepEstimate(ds, plan, models);
      r.twostep = ts.mean;
      r.naive = TwoStepNaiveCi(ts.mean, ts.sample_var, ds.n(), config.alpha);
    }
    if (config.oracle) {
      options.method = NuisanceMethod::kOracle;
      std::vector<NuisanceModel> truth;
      for (int k = 0; k < plan.K; ++k) truth.push_back(FitNuisance(ds, plan, k, options));
      r.oracle = TwoStepEstimate(ds, plan, truth).mean;
    }
  } catch (const Error& e) {
    r = Replication{};
    r.seed = seed;
    r.failed = true;
    r.error = e.what();
  }
  return r;
}

ExperimentReport RunExperiment(const ExperimentConfig& config) {
  if (config.reps < 1) Fail(ErrorCode::kConfigError, "reps must be >= 1");
  if (config.cells.empty()) Fail(ErrorCode::kConfigError, "experiment has no cells");
  if (!(config.alpha > 0.0 && config.alpha < 1.0)) Fail(ErrorCode::kConfigError, "alpha must lie in (0, 1)");
  for (const ExperimentCell& cell : config.cells) {
    cell.design.Validate();
    if ((cell.nuisance == NuisanceMethod::kLasso) && config.lasso.cv_folds < 2) {
      Fail(ErrorCode::kConfigError, "lasso cv_folds must be >= 2");
    }
  }
  ExperimentReport report;
  report.config = config;
  const int cells = static_cast<int>(config.cells.size());
  report.replications.assign(cells, std::vector<Replication>(config.reps));
  const long total = static_cast<long>(cells) * config.reps;
  std::atomic<long> next{0};
  auto worker = [&] {
    for (long job = next++; job < total; job = next++) {
      const int c = static_cast<int>(job / config.reps);
      const int r = static_cast<int>(job % config.reps);
      report.replications[c][r] =
          RunReplication(config.cells[c], ReplicationSeed(config.seed, c, r), config);
    }
  };
  const int threads = std::max(1, config.threads);
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (std::thread& t : pool) t.join();
  }
  for (int c = 0; c < cells; ++c) {
    for (MetricRow& row : Summarize(config.cells[c], report.replications[c], config)) {
      report.rows.push_back(std::move(row));
    }
  }
  return report;
}

std::string ExperimentReport::SummaryCsv() const {
  std::ostringstream out;
  out << "cell_id,estimator,method,n,dim,v_tau,nuisance,reps,failures,mean_estimate,bias,rmse,"
         "rmse_se,coverage,coverage_se,rejection_rate,rejection_se,below_rate,below_se,"
         "mean_ci_length,degenerate_rate\n";
  for (const MetricRow& r : rows) {
    out << r.cell_id << ',' << r.estimator << ',' << r.method << ',' << r.n << ',' << r.p << ','
        << Num(r.v_tau) << ',' << r.nuisance << ',' << r.reps << ',' << r.failures << ','
        << Num(r.mean_estimate) << ',' << Num(r.bias) << ',' << Num(r.rmse) << ','
        << Num(r.rmse_se) << ',' << Num(r.coverage) << ',' << Num(r.coverage_se) << ','
        << Num(r.rejection_rate) << ',' << Num(r.rejection_se) << ',' << Num(r.below_rate) << ','
        << Num(r.below_se) << ',' << Num(r.mean_ci_length) << ',' << Num(r.degenerate_rate)
        << '\n';
  }
  return out.str();
}

std::string ExperimentReport::DrawsCsv() const {
  std::ostringstream out;
  out << "cell_id,rep,seed,failed,multistep,twostep,oracle,single_lo,single_hi,multi_lo,"
         "multi_hi,naive_lo,naive_hi,degenerate_folds\n";
  for (std::size_t c = 0; c < replications.size(); ++c) {
    for (std::size_t i = 0; i < replications[c].size(); ++i) {
      const Replication& r = replications[c][i];
      out << config.cells[c].id << ',' << i << ',' << r.seed << ',' << (r.failed ? 1 : 0) << ',';
      if (r.failed) {
        out << ",,,,,,,,,\n";
        continue;
      }
      out << Num(r.multistep) << ',' << (config.twostep ? Num(r.twostep) : "") << ','
          << (config.oracle ? Num(r.oracle) : "") << ',' << Num(r.single_fold.lo) << ','
          << Num(r.single_fold.hi) << ',' << Num(r.multifold.lo) << ',' << Num(r.multifold.hi)
          << ',' << (config.twostep ? Num(r.naive.lo) : "") << ','
          << (config.twostep ? Num(r.naive.hi) : "") << ',' << r.degenerate_folds << '\n';
    }
  }
  return out.str();
}

std::string ExperimentReport::SummaryJson() const {
  Json j;
  j["name"] = config.name;
  j["reps"] = config.reps;
  j["seed"] = config.seed;
  j["alpha"] = config.alpha;
  j["lasso"] = {{"n_lambda", config.lasso.n_lambda},
                {"lambda_min_ratio", config.lasso.lambda_min_ratio},
                {"cv_folds", config.lasso.cv_folds}};
  j["grid"] = {{"points", config.grid.points},
               {"cap_sds", config.grid.cap_sds},
               {"tol_rel", config.grid.tol_rel}};
  Json cells = Json::array();
  for (std::size_t c = 0; c < config.cells.size(); ++c) {
    const ExperimentCell& cell = config.cells[c];
    Json jc;
    jc["id"] = cell.id;
    jc["nuisance"] = NuisanceMethodName(cell.nuisance);
    jc["design"] = DesignJson(cell.design);
    jc["true_vcate"] = TrueVcate(cell.design);
    Json metrics = Json::array();
    for (const MetricRow& r : rows) {
      if (r.cell_id != cell.id) continue;
      auto val = [](double v) { return std::isnan(v) ? Json(nullptr) : Json(v); };
      metrics.push_back({{"estimator", r.estimator},
                         {"method", r.method},
                         {"failures", r.failures},
                         {"mean_estimate", val(r.mean_estimate)},
                         {"bias", val(r.bias)},
                         {"rmse", val(r.rmse)},
                         {"rmse_se", val(r.rmse_se)},
                         {"coverage", val(r.coverage)},
                         {"coverage_se", val(r.coverage_se)},
                         {"rejection_rate", val(r.rejection_rate)},
                         {"rejection_se", val(r.rejection_se)},
                         {"below_rate", val(r.below_rate)},
                         {"below_se", val(r.below_se)},
                         {"mean_ci_length", val(r.mean_ci_length)},
                         {"degenerate_rate", val(r.degenerate_rate)}});
    }
    jc["metrics"] = metrics;
    cells.push_back(jc);
  }
  j["cells"] = cells;
  return j.dump(2) + "\n";
}

ExperimentConfig ExperimentPreset(const std::string& name) {
  ExperimentConfig config;
  config.name = name;
  config.seed = 20240101;
  SimulationDesign base;
  if (name == "fig3_small") {
    config.reps = 500;
    config.cells = Grid(base, {2500}, {10, 40}, {0.0, 0.5, 1.0}, {NuisanceMethod::kLasso});
  } else if (name == "fig_rmse") {
    config.reps = 500;
    config.cells = Grid(base, {500, 1000, 2500}, {10}, {0.0, 0.5, 1.0}, {NuisanceMethod::kLasso});
  } else if (name == "fig_power") {
    // Drift n_k V in {0, 1, 4, 9} with n_k = 1250.
    config.reps = 2000;
    config.cells = Grid(base, {2500}, {10}, {0.0, 1.0 / 1250, 4.0 / 1250, 9.0 / 1250},
                        {NuisanceMethod::kOracleDirection});
  } else if (name == "smoke") {
    config.reps = 20;
    config.cells = Grid(base, {500}, {10}, {0.0, 1.0}, {NuisanceMethod::kOls});
  } else {
    Fail(ErrorCode::kConfigError, "unknown preset '" + name + "'");
  }
  return config;
}

ExperimentConfig ParseExperimentConfig(const std::string& json_text) {
  const Json j = json_util::Parse(json_text, "experiment config");
  RejectUnknown(j, {"preset", "name", "reps", "seed", "alpha", "threads", "twostep", "oracle",
                    "lasso", "grid", "design", "axes", "cells"},
                "experiment config");
  ExperimentConfig config;
  if (j.contains("preset")) {
    std::string preset;
    Take(j, "preset", preset);
    config = ExperimentPreset(preset);
  }
  Take(j, "name", config.name);
  Take(j, "reps", config.reps);
  Take(j, "seed", config.seed);
  Take(j, "alpha", config.alpha);
  Take(j, "threads", config.threads);
  Take(j, "twostep", config.twostep);
  Take(j, "oracle", config.oracle);
  if (j.contains("lasso")) {
    const Json& l = j.at("lasso");
    RejectUnknown(l, {"n_lambda", "lambda_min_ratio", "cv_folds"}, "lasso");
    Take(l, "n_lambda", config.lasso.n_lambda);
    Take(l, "lambda_min_ratio", config.lasso.lambda_min_ratio);
    Take(l, "cv_folds", config.lasso.cv_folds);
  }
  if (j.contains("grid")) {
    const Json& g = j.at("grid");
    RejectUnknown(g, {"points", "cap_sds", "tol_rel", "max_doublings"}, "grid");
    Take(g, "points", config.grid.points);
    Take(g, "cap_sds", config.grid.cap_sds);
    Take(g, "tol_rel", config.grid.tol_rel);
    Take(g, "max_doublings", config.grid.max_doublings);
  }
  SimulationDesign base;
  if (j.contains("design")) ApplyDesign(j.at("design"), base);
  if (j.contains("axes")) {
    const Json& a = j.at("axes");
    RejectUnknown(a, {"n", "dim", "v_tau", "nuisance"}, "axes");
    std::vector<int> ns{base.n}, dims{base.p()};
    std::vector<double> vs{base.v_tau};
    std::vector<std::string> names{"lasso"};
    Take(a, "n", ns);
    Take(a, "dim", dims);
    Take(a, "v_tau", vs);
    Take(a, "nuisance", names);
    std::vector<NuisanceMethod> methods;
    for (const std::string& s : names) methods.push_back(ParseNuisanceMethod(s));
    for (int dim : dims) {
      if (dim < 2 || dim % 2 != 0) Fail(ErrorCode::kConfigError, "dim must be an even number >= 2");
    }
    config.cells = Grid(base, ns, dims, vs, methods);
  }
  if (j.contains("cells")) {
    const Json& cells = j.at("cells");
    if (!cells.is_array()) Fail(ErrorCode::kConfigError, "cells must be an array");
    config.cells.clear();
    for (const Json& c : cells) {
      RejectUnknown(c, {"id", "nuisance", "design"}, "cell");
      ExperimentCell cell;
      cell.design = base;
      if (c.contains("design")) ApplyDesign(c.at("design"), cell.design);
      std::string method = "lasso";
      Take(c, "nuisance", method);
      cell.nuisance = ParseNuisanceMethod(method);
      cell.id = CellId(cell.design, cell.nuisance);
      Take(c, "id", cell.id);
      config.cells.push_back(cell);
    }
  }
  if (config.cells.empty()) {
    config.cells = Grid(base, {base.n}, {base.p()}, {base.v_tau}, {NuisanceMethod::kLasso});
  }
  for (const ExperimentCell& cell : config.cells) cell.design.Validate();
  if (config.reps < 1) Fail(ErrorCode::kConfigError, "reps must be >= 1");
  return config;
}

}  // namespace vcate
