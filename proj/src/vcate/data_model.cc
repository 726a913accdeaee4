#include "vcate/data_model.h"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <random>
#include <string>

#include "vcate/errors.h"

namespace vcate {

namespace {

std::mt19937_64 SplitRng(std::uint64_t seed, int split_id) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed & 0xffffffffu),
                    static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(split_id), 0x5eedf01du};
  return std::mt19937_64(seq);
}

void FillMembers(FoldPlan& plan) {
  plan.members.assign(plan.K, {});
  for (std::size_t i = 0; i < plan.assignment.size(); ++i) {
    plan.members[plan.assignment[i]].push_back(i);
  }
}

}  // namespace

std::vector<std::size_t> FoldPlan::Complement(int k) const {
  std::vector<std::size_t> out;
  out.reserve(assignment.size() - members.at(k).size());
  for (std::size_t i = 0; i < assignment.size(); ++i) {
    if (assignment[i] != k) out.push_back(i);
  }
  return out;
}

FoldPlan MakeFolds(std::size_t n, int K, std::uint64_t seed, int split_id,
                   std::span<const std::int64_t> cluster_id) {
  if (K < 2) Fail(ErrorCode::kInvalidK, "fold count must be >= 2, got " + std::to_string(K));
  const std::size_t k = static_cast<std::size_t>(K);
  if (n < 2 * k) {
    Fail(ErrorCode::kTooFewUnits,
         "need n >= 2K units, got n=" + std::to_string(n) + " K=" + std::to_string(K));
  }
  FoldPlan plan;
  plan.K = K;
  plan.split_id = split_id;
  plan.seed = seed;
  plan.assignment.assign(n, 0);
  auto rng = SplitRng(seed, split_id);

  if (cluster_id.empty()) {
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::shuffle(order.begin(), order.end(), rng);
    const std::size_t base = n / k, rem = n % k;
    std::size_t pos = 0;
    for (std::size_t f = 0; f < k; ++f) {
      const std::size_t size = base + (f < rem ? 1 : 0);
      for (std::size_t j = 0; j < size; ++j) plan.assignment[order[pos++]] = static_cast<int>(f);
    }
    FillMembers(plan);
    return plan;
  }

  if (cluster_id.size() != n) {
    Fail(ErrorCode::kInvalidArgument, "cluster_id length differs from n");
  }
  std::map<std::int64_t, std::vector<std::size_t>> clusters;
  for (std::size_t i = 0; i < n; ++i) clusters[cluster_id[i]].push_back(i);
  if (clusters.size() < 2 * k) {
    Fail(ErrorCode::kTooFewUnits, "need at least 2K clusters, got " +
                                      std::to_string(clusters.size()) +
                                      " for K=" + std::to_string(K));
  }
  std::vector<const std::vector<std::size_t>*> units;
  units.reserve(clusters.size());
  for (const auto& [id, rows] : clusters) units.push_back(&rows);
  std::shuffle(units.begin(), units.end(), rng);

  // First K clusters seed the folds so none is empty; the rest go to the
  // fold with the fewest observations.
  std::vector<std::size_t> load(k, 0);
  for (std::size_t c = 0; c < units.size(); ++c) {
    std::size_t target = c;
    if (c >= k) {
      target = static_cast<std::size_t>(
          std::min_element(load.begin(), load.end()) - load.begin());
    }
    for (std::size_t i : *units[c]) plan.assignment[i] = static_cast<int>(target);
    load[target] += units[c]->size();
  }
  FillMembers(plan);
  return plan;
}

void ValidateDataset(const Dataset& ds, double delta) {
  if (!(delta > 0.0 && delta < 0.5)) {
    Fail(ErrorCode::kInvalidArgument, "overlap bound delta must lie in (0, 1/2)");
  }
  const std::size_t n = ds.n();
  if (ds.d.size() != n || static_cast<std::size_t>(ds.x.rows()) != n ||
      static_cast<std::size_t>(ds.pscore.size()) != n) {
    Fail(ErrorCode::kInvalidArgument, "y, d, x and pscore must have the same length");
  }
  if (ds.cluster_id && ds.cluster_id->size() != n) {
    Fail(ErrorCode::kInvalidArgument, "cluster_id length differs from n");
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (!std::isfinite(ds.y[i])) {
      Fail(ErrorCode::kNonFiniteValue, "outcome at index " + std::to_string(i));
    }
    for (Eigen::Index j = 0; j < ds.x.cols(); ++j) {
      if (!std::isfinite(ds.x(i, j))) {
        Fail(ErrorCode::kNonFiniteValue, "covariate " + std::to_string(j) +
                                             " at index " + std::to_string(i));
      }
    }
    if (!std::isfinite(ds.pscore[i])) {
      Fail(ErrorCode::kNonFiniteValue, "pscore at index " + std::to_string(i));
    }
    if (ds.d[i] != 0 && ds.d[i] != 1) {
      Fail(ErrorCode::kNonBinaryTreatment,
           "treatment at index " + std::to_string(i) + " is " + std::to_string(ds.d[i]));
    }
    if (ds.pscore[i] < delta || ds.pscore[i] > 1.0 - delta) {
      Fail(ErrorCode::kOverlapViolation, "pscore at index " + std::to_string(i) + " is " +
                                             std::to_string(ds.pscore[i]) +
                                             ", outside [delta, 1 - delta]");
    }
  }
}

Dataset Subset(const Dataset& ds, std::span<const std::size_t> rows) {
  Dataset out;
  const auto m = static_cast<Eigen::Index>(rows.size());
  out.y.resize(m);
  out.pscore.resize(m);
  out.x.resize(m, ds.x.cols());
  out.d.resize(rows.size());
  if (ds.cluster_id) out.cluster_id.emplace(rows.size());
  for (Eigen::Index r = 0; r < m; ++r) {
    const std::size_t i = rows[r];
    out.y[r] = ds.y[i];
    out.pscore[r] = ds.pscore[i];
    out.x.row(r) = ds.x.row(i);
    out.d[r] = ds.d[i];
    if (ds.cluster_id) (*out.cluster_id)[r] = (*ds.cluster_id)[i];
  }
  return out;
}

}  // namespace vcate
