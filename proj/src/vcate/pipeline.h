#ifndef VCATE_PIPELINE_H_
#define VCATE_PIPELINE_H_

#include <cstdint>
#include <string>
#include <vector>

#include "vcate/data_model.h"
#include "vcate/inference.h"
#include "vcate/multistep.h"
#include "vcate/nuisance.h"

namespace vcate {

enum class ReportUnits { kVariance, kSd, kSdNormalized };

struct EstimateOptions {
  int K = 2;
  int n_splits = 20;
  double alpha = 0.05;
  std::uint64_t seed = 0;
  double delta = 0.01;
  int threads = 1;
  ReportUnits units = ReportUnits::kVariance;
  NuisanceOptions nuisance;
  GridConfig grid;
};

// Reads the "estimation" keys of a JSON object (see README) on top of `base`.
EstimateOptions ParseEstimateOptions(const std::string& json_text, EstimateOptions base = {});
ReportUnits ParseUnits(const std::string& name);
const char* UnitsName(ReportUnits units);

struct SplitResult {
  int split = 0;
  std::vector<FoldEstimate> folds;
  // Fold intervals at alpha / 2 (inputs of the multifold interval).
  std::vector<ConfidenceInterval> cis;
  double ensemble = 0.0;
  double ate = 0.0;
};

struct EstimateResult {
  EstimateOptions options;
  std::size_t n = 0;
  std::size_t p = 0;
  bool clustered = false;
  std::vector<SplitResult> splits;
  double point = 0.0;        // median over splits of the ensemble
  ConfidenceInterval ci;     // median over all folds and splits
  double ate = 0.0;          // median over splits of the cross-fitted AIPW estimate
  double control_sd = 0.0;   // sample SD of y among controls
  int degenerate_folds = 0;

  std::string EstimateJson() const;
  std::string TestJson() const;
};

// Cross-fits over n_splits random K-fold partitions. Clustered covariance is
// used when the dataset has cluster ids.
EstimateResult RunEstimate(const Dataset& ds, const EstimateOptions& options);

}  // namespace vcate

#endif  // VCATE_PIPELINE_H_
