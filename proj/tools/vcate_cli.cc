// Command-line front end: reads CSV data and JSON configs, calls the C API,
// writes JSON reports and experiment tables.
#include <algorithm>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "csv.h"
#include "vcate/vcate.h"

namespace {

using Json = nlohmann::ordered_json;

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitData = 3;
constexpr int kExitInternal = 1;

struct CliError {
  int exit_code;
  std::string message;
};

[[noreturn]] void ConfigFail(const std::string& msg) { throw CliError{kExitConfig, msg}; }
[[noreturn]] void DataFail(const std::string& msg) { throw CliError{kExitData, msg}; }

int ExitCodeFor(int status) {
  switch (status) {
    case VCATE_OK: return kExitOk;
    case VCATE_INVALID_ARGUMENT:
    case VCATE_INVALID_K:
    case VCATE_CONFIG_ERROR: return kExitConfig;
    case VCATE_INTERNAL: return kExitInternal;
    default: return kExitData;
  }
}

void Check(int status) {
  if (status != VCATE_OK) throw CliError{ExitCodeFor(status), vcate_last_error()};
}

std::string TakeString(char* s) {
  std::string out(s);
  vcate_string_free(s);
  return out;
}

std::string ReadText(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) ConfigFail("cannot open '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void WriteText(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) ConfigFail("cannot write '" + path + "'");
  out << text;
}

Json ParseJson(const std::string& text, const std::string& what) {
  try {
    return Json::parse(text);
  } catch (const Json::exception& e) {
    ConfigFail(what + " is not valid JSON: " + e.what());
  }
}

// Options shared by estimate and test; unset flags leave the config file
// values alone.
struct DataFlags {
  std::string config;
  std::string input;
  std::string outcome;
  std::string treatment;
  std::string covariates;
  std::string pscore_column;
  std::optional<double> pscore;
  std::string cluster;
  std::string output;
  std::optional<int> K;
  std::optional<int> n_splits;
  std::optional<double> alpha;
  std::optional<std::uint64_t> seed;
  std::optional<double> delta;
  std::optional<int> threads;
  std::string first_stage;
  std::string units;
};

void AddDataFlags(CLI::App* cmd, DataFlags& f) {
  cmd->add_option("--config", f.config, "JSON config file");
  cmd->add_option("--input", f.input, "CSV file with a header row");
  cmd->add_option("--outcome", f.outcome, "outcome column");
  cmd->add_option("--treatment", f.treatment, "0/1 treatment column");
  cmd->add_option("--covariates", f.covariates, "comma-separated covariate columns");
  cmd->add_option("--pscore-column", f.pscore_column, "propensity score column");
  cmd->add_option("--pscore", f.pscore, "constant propensity score");
  cmd->add_option("--cluster", f.cluster, "cluster id column (enables clustered covariance)");
  cmd->add_option("--output", f.output, "report path ('-' for stdout)");
  cmd->add_option("--K", f.K, "folds per split");
  cmd->add_option("--n-splits", f.n_splits, "number of random splits");
  cmd->add_option("--alpha", f.alpha, "nominal size");
  cmd->add_option("--seed", f.seed, "random seed");
  cmd->add_option("--delta", f.delta, "overlap bound");
  cmd->add_option("--threads", f.threads, "worker threads");
  cmd->add_option("--first-stage", f.first_stage, "lasso | ols");
  cmd->add_option("--units", f.units, "variance | sd | sd_normalized_by_control_sd");
}

struct Bindings {
  std::string path;
  std::string outcome;
  std::string treatment;
  std::vector<std::string> covariates;
  std::string pscore_column;
  std::optional<double> pscore;
  std::string cluster;
};

struct Loaded {
  std::vector<double> y;
  std::vector<int> d;
  std::vector<double> x;
  std::vector<double> pscore;
  std::vector<std::int64_t> cluster;
  std::size_t n = 0;
  std::size_t rows_read = 0;
};

bool Blank(const std::string& s) { return s.find_first_not_of(" \t") == std::string::npos; }

Loaded LoadCsv(const Bindings& b) {
  Loaded out;
  try {
    const csv::Table table = csv::ReadFile(b.path);
    auto column = [&](const std::string& name) {
      const auto it = std::find(table.header.begin(), table.header.end(), name);
      if (it == table.header.end()) ConfigFail("bound column '" + name + "' not found in " + b.path);
      return static_cast<int>(it - table.header.begin());
    };
    const int iy = column(b.outcome);
    const int id = column(b.treatment);
    std::vector<int> ix;
    for (const std::string& c : b.covariates) ix.push_back(column(c));
    const int ip = b.pscore_column.empty() ? -1 : column(b.pscore_column);
    const int ic = b.cluster.empty() ? -1 : column(b.cluster);
    std::vector<int> used{iy, id};
    used.insert(used.end(), ix.begin(), ix.end());
    if (ip >= 0) used.push_back(ip);
    if (ic >= 0) used.push_back(ic);
    out.rows_read = table.rows.size();
    for (std::size_t r = 0; r < table.rows.size(); ++r) {
      const auto& row = table.rows[r];
      const int line = table.lines[r];
      bool missing = false;
      for (int c : used) missing = missing || Blank(row[c]);
      if (missing) continue;
      out.y.push_back(csv::ToDouble(row[iy], line, b.outcome));
      const double dv = csv::ToDouble(row[id], line, b.treatment);
      if (dv != 0.0 && dv != 1.0) {
        throw csv::ParseError("line " + std::to_string(line) + ", column '" + b.treatment +
                              "': treatment must be 0 or 1");
      }
      out.d.push_back(static_cast<int>(dv));
      for (std::size_t j = 0; j < ix.size(); ++j) {
        out.x.push_back(csv::ToDouble(row[ix[j]], line, b.covariates[j]));
      }
      out.pscore.push_back(ip >= 0 ? csv::ToDouble(row[ip], line, b.pscore_column) : *b.pscore);
      if (ic >= 0) {
        const double cv = csv::ToDouble(row[ic], line, b.cluster);
        if (cv != static_cast<double>(static_cast<std::int64_t>(cv))) {
          throw csv::ParseError("line " + std::to_string(line) + ", column '" + b.cluster +
                                "': cluster ids must be integers");
        }
        out.cluster.push_back(static_cast<std::int64_t>(cv));
      }
    }
  } catch (const csv::ParseError& e) {
    DataFail(std::string("ParseError: ") + e.what());
  }
  out.n = out.y.size();
  return out;
}

std::vector<std::string> SplitList(const std::string& s) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream in(s);
  while (std::getline(in, item, ',')) {
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

struct Resolved {
  Bindings bindings;
  Json estimation = Json::object();
  std::string output;
};

Resolved Resolve(const DataFlags& f) {
  Resolved r;
  Json cfg = Json::object();
  if (!f.config.empty()) cfg = ParseJson(ReadText(f.config), "config file");
  if (!cfg.is_object()) ConfigFail("config file must hold a JSON object");
  for (const auto& [k, v] : cfg.items()) {
    if (k != "input" && k != "estimation" && k != "output") {
      ConfigFail("unknown section '" + k + "' in config file");
    }
  }
  try {
    if (cfg.contains("input")) {
      const Json& in = cfg["input"];
      for (const auto& [k, v] : in.items()) {
        if (k != "path" && k != "outcome" && k != "treatment" && k != "covariates" &&
            k != "pscore" && k != "pscore_column" && k != "cluster") {
          ConfigFail("unknown key '" + k + "' in input");
        }
      }
      r.bindings.path = in.value("path", "");
      r.bindings.outcome = in.value("outcome", "");
      r.bindings.treatment = in.value("treatment", "");
      if (in.contains("covariates")) r.bindings.covariates = in["covariates"].get<std::vector<std::string>>();
      r.bindings.pscore_column = in.value("pscore_column", "");
      if (in.contains("pscore")) r.bindings.pscore = in["pscore"].get<double>();
      r.bindings.cluster = in.value("cluster", "");
    }
    if (cfg.contains("estimation")) r.estimation = cfg["estimation"];
    if (cfg.contains("output")) {
      const Json& o = cfg["output"];
      for (const auto& [k, v] : o.items()) {
        if (k != "path") ConfigFail("unknown key '" + k + "' in output");
      }
      r.output = o.value("path", "");
    }
  } catch (const Json::exception& e) {
    ConfigFail(std::string("bad config value: ") + e.what());
  }
  if (!r.estimation.is_object()) ConfigFail("estimation section must be an object");

  if (!f.input.empty()) r.bindings.path = f.input;
  if (!f.outcome.empty()) r.bindings.outcome = f.outcome;
  if (!f.treatment.empty()) r.bindings.treatment = f.treatment;
  if (!f.covariates.empty()) r.bindings.covariates = SplitList(f.covariates);
  if (!f.pscore_column.empty()) {
    r.bindings.pscore_column = f.pscore_column;
    r.bindings.pscore.reset();
  }
  if (f.pscore) {
    r.bindings.pscore = f.pscore;
    r.bindings.pscore_column.clear();
  }
  if (!f.cluster.empty()) r.bindings.cluster = f.cluster;
  if (!f.output.empty()) r.output = f.output;
  if (f.K) r.estimation["K"] = *f.K;
  if (f.n_splits) r.estimation["n_splits"] = *f.n_splits;
  if (f.alpha) r.estimation["alpha"] = *f.alpha;
  if (f.seed) r.estimation["seed"] = *f.seed;
  if (f.delta) r.estimation["delta"] = *f.delta;
  if (f.threads) r.estimation["threads"] = *f.threads;
  if (!f.first_stage.empty()) r.estimation["first_stage"] = f.first_stage;
  if (!f.units.empty()) r.estimation["units"] = f.units;

  const Bindings& b = r.bindings;
  if (b.path.empty()) ConfigFail("no input file (use --input or input.path)");
  if (b.outcome.empty() || b.treatment.empty()) ConfigFail("outcome and treatment columns are required");
  if (b.pscore_column.empty() && !b.pscore) ConfigFail("give a propensity column or a constant --pscore");
  return r;
}

int RunEstimateLike(const DataFlags& flags, bool test) {
  const Resolved r = Resolve(flags);
  const Loaded data = LoadCsv(r.bindings);
  const std::size_t p = r.bindings.covariates.size();
  vcate_dataset* ds = nullptr;
  Check(vcate_dataset_create(data.y.data(), data.d.data(), data.x.data(), data.pscore.data(),
                             data.cluster.empty() ? nullptr : data.cluster.data(), data.n, p, &ds));
  vcate_result* res = nullptr;
  const int status = vcate_estimate(ds, r.estimation.dump().c_str(), &res);
  vcate_dataset_destroy(ds);
  Check(status);
  char* text = nullptr;
  const int st = test ? vcate_result_test_json(res, &text) : vcate_result_estimate_json(res, &text);
  vcate_result_destroy(res);
  Check(st);
  Json report = ParseJson(TakeString(text), "library report");
  Json input;
  input["path"] = r.bindings.path;
  input["rows_read"] = data.rows_read;
  input["rows_used"] = data.n;
  input["rows_dropped"] = data.rows_read - data.n;
  input["outcome"] = r.bindings.outcome;
  input["treatment"] = r.bindings.treatment;
  input["covariates"] = r.bindings.covariates;
  report["input"] = input;
  WriteText(r.output, report.dump(2) + "\n");
  return kExitOk;
}

struct SimFlags {
  std::string preset;
  std::string config;
  std::optional<int> reps;
  std::optional<std::uint64_t> seed;
  std::optional<int> threads;
  std::string out_prefix = "vcate_sim";
};

int RunSimulate(const SimFlags& f) {
  Json cfg = Json::object();
  if (!f.config.empty()) cfg = ParseJson(ReadText(f.config), "experiment config");
  if (!cfg.is_object()) ConfigFail("experiment config must hold a JSON object");
  if (!f.preset.empty()) cfg["preset"] = f.preset;
  if (f.reps) cfg["reps"] = *f.reps;
  if (f.seed) cfg["seed"] = *f.seed;
  if (f.threads) cfg["threads"] = *f.threads;
  if (!cfg.contains("preset") && !cfg.contains("cells") && !cfg.contains("axes")) {
    ConfigFail("give --preset or an experiment config with cells or axes");
  }
  vcate_experiment* e = nullptr;
  Check(vcate_experiment_run(cfg.dump().c_str(), &e));
  char* summary = nullptr;
  char* draws = nullptr;
  char* json = nullptr;
  int st = vcate_experiment_summary_csv(e, &summary);
  if (st == VCATE_OK) st = vcate_experiment_draws_csv(e, &draws);
  if (st == VCATE_OK) st = vcate_experiment_summary_json(e, &json);
  vcate_experiment_destroy(e);
  Check(st);
  WriteText(f.out_prefix + "_summary.csv", TakeString(summary));
  WriteText(f.out_prefix + "_draws.csv", TakeString(draws));
  WriteText(f.out_prefix + "_summary.json", TakeString(json));
  std::cerr << "wrote " << f.out_prefix << "_{summary.csv,draws.csv,summary.json}\n";
  return kExitOk;
}

struct WelfareFlags {
  double ate = 0.0;
  std::optional<double> vcate;
  std::optional<double> sd_vcate;
  double k1 = 0.0;
  double k2 = 1.0;
};

int RunWelfare(const WelfareFlags& f) {
  if (f.vcate.has_value() == f.sd_vcate.has_value()) ConfigFail("give exactly one of --vcate, --sd-vcate");
  if (f.sd_vcate && *f.sd_vcate < 0.0) ConfigFail("--sd-vcate must be >= 0");
  const double v = f.vcate ? *f.vcate : *f.sd_vcate * *f.sd_vcate;
  double simple = 0.0, general = 0.0, transformed = 0.0;
  Check(vcate_welfare_bounds(f.ate, v, &simple, &general));
  Check(vcate_transform_bound(f.ate, v, f.k1, f.k2, &transformed));
  Json j;
  j["ate"] = f.ate;
  j["vcate"] = v;
  j["sd_vcate"] = std::sqrt(v);
  j["simple_bound"] = simple;
  j["general_bound"] = general;
  j["k1"] = f.k1;
  j["k2"] = f.k2;
  j["transformed_bound"] = transformed;
  if (v > 0.0) {
    double p1 = 0.0, tau0 = 0.0, tau1 = 0.0;
    Check(vcate_adversarial_design(f.ate, v, &p1, &tau0, &tau1));
    j["adversarial_design"] = {{"p1", p1}, {"tau0", tau0}, {"tau1", tau1}};
  }
  std::cout << j.dump(2) << "\n";
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Variance of the conditional average treatment effect: estimation, "
               "homogeneity tests, welfare bounds and simulations"};
  app.require_subcommand(1);

  DataFlags est_flags, test_flags;
  CLI::App* est = app.add_subcommand("estimate", "estimate the VCATE with a multifold interval");
  AddDataFlags(est, est_flags);
  CLI::App* test = app.add_subcommand("test", "homogeneity tests per fold and across folds");
  AddDataFlags(test, test_flags);

  SimFlags sim_flags;
  CLI::App* sim = app.add_subcommand("simulate", "run a simulation study");
  sim->add_option("--preset", sim_flags.preset, "fig3_small | fig_rmse | fig_power | smoke");
  sim->add_option("--config", sim_flags.config, "experiment JSON file");
  sim->add_option("--reps", sim_flags.reps, "replications per cell");
  sim->add_option("--seed", sim_flags.seed, "master seed");
  sim->add_option("--threads", sim_flags.threads, "worker threads");
  sim->add_option("--out-prefix", sim_flags.out_prefix, "output path prefix");

  WelfareFlags wf;
  CLI::App* wel = app.add_subcommand("welfare", "bounds on the gains from targeting");
  wel->add_option("--ate", wf.ate, "average treatment effect")->required();
  wel->add_option("--vcate", wf.vcate, "variance of the CATE");
  wel->add_option("--sd-vcate", wf.sd_vcate, "square root of the VCATE");
  wel->add_option("--k1", wf.k1, "location of the transformed outcome k1 + k2 Y");
  wel->add_option("--k2", wf.k2, "scale of the transformed outcome k1 + k2 Y");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitConfig;
  }
  try {
    if (est->parsed()) return RunEstimateLike(est_flags, false);
    if (test->parsed()) return RunEstimateLike(test_flags, true);
    if (sim->parsed()) return RunSimulate(sim_flags);
    if (wel->parsed()) return RunWelfare(wf);
  } catch (const CliError& e) {
    std::cerr << "vcate: " << e.message << "\n";
    return e.exit_code;
  }
  return kExitInternal;
}
