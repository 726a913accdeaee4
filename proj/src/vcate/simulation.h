#ifndef VCATE_SIMULATION_H_
#define VCATE_SIMULATION_H_

#include <cstdint>
#include <string>
#include <vector>

#include "vcate/design.h"
#include "vcate/dml_twostep.h"
#include "vcate/inference.h"
#include "vcate/multistep.h"
#include "vcate/nuisance.h"

namespace vcate {

struct ExperimentCell {
  std::string id;
  SimulationDesign design;
  NuisanceMethod nuisance = NuisanceMethod::kLasso;
};

struct ExperimentConfig {
  std::string name = "custom";
  std::vector<ExperimentCell> cells;
  int reps = 100;
  std::uint64_t seed = 0;
  double alpha = 0.05;
  int threads = 1;
  LassoOptions lasso;
  GridConfig grid;
  // Also run the two-step estimator and its oracle-nuisance version.
  bool twostep = true;
  bool oracle = true;
};

// Everything computed for one simulated dataset.
struct Replication {
  std::uint64_t seed = 0;
  bool failed = false;
  std::string error;
  std::vector<FoldEstimate> folds;
  double multistep = 0.0;
  // Adaptive interval of the first fold at alpha.
  ConfidenceInterval single_fold;
  // Per-fold intervals at alpha / 2 and their median.
  std::vector<ConfidenceInterval> fold_cis_half;
  ConfidenceInterval multifold;
  // Per-fold homogeneity tests at alpha.
  std::vector<HomogeneityResult> tests;
  double twostep = 0.0;
  ConfidenceInterval naive;
  double oracle = 0.0;
  int degenerate_folds = 0;
};

// Stream seed for replication `rep` of cell `cell`.
std::uint64_t ReplicationSeed(std::uint64_t seed, int cell, int rep);

// Simulate, cross-fit and run every estimator on one dataset. Errors thrown
// by the estimators are caught and reported through `failed`.
Replication RunReplication(const ExperimentCell& cell, std::uint64_t seed,
                           const ExperimentConfig& config);

struct MetricRow {
  std::string cell_id;
  std::string estimator;  // multistep | twostep | oracle
  std::string method;     // point | single_fold | multifold | naive
  int n = 0;
  int p = 0;
  double v_tau = 0.0;
  std::string nuisance;
  int reps = 0;
  int failures = 0;
  // NaN marks metrics that do not apply to the row.
  double mean_estimate = 0.0;
  double bias = 0.0;
  double rmse = 0.0;
  double rmse_se = 0.0;
  double coverage = 0.0;
  double coverage_se = 0.0;
  double rejection_rate = 0.0;
  double rejection_se = 0.0;
  double below_rate = 0.0;
  double below_se = 0.0;
  double mean_ci_length = 0.0;
  double degenerate_rate = 0.0;
};

struct ExperimentReport {
  ExperimentConfig config;
  std::vector<MetricRow> rows;
  // replications[c][r] for cell c.
  std::vector<std::vector<Replication>> replications;

  std::string SummaryCsv() const;
  std::string DrawsCsv() const;
  std::string SummaryJson() const;
};

ExperimentReport RunExperiment(const ExperimentConfig& config);

// Named grids: "fig3_small", "fig_power", "fig_rmse", "smoke".
ExperimentConfig ExperimentPreset(const std::string& name);

// Parses an experiment description (JSON text); see README for the keys.
ExperimentConfig ParseExperimentConfig(const std::string& json_text);

}  // namespace vcate

#endif  // VCATE_SIMULATION_H_
