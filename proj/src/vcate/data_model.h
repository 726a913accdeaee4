#ifndef VCATE_DATA_MODEL_H_
#define VCATE_DATA_MODEL_H_

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include <Eigen/Dense>

namespace vcate {

// Experimental sample: outcome, binary treatment, baseline covariates (one
// row per unit), known assignment probability, optional cluster ids.
struct Dataset {
  Eigen::VectorXd y;
  std::vector<int> d;
  Eigen::MatrixXd x;
  Eigen::VectorXd pscore;
  std::optional<std::vector<std::int64_t>> cluster_id;

  std::size_t n() const { return static_cast<std::size_t>(y.size()); }
  std::size_t p() const { return static_cast<std::size_t>(x.cols()); }
  bool clustered() const { return cluster_id.has_value(); }
};

// Random partition of {0..n-1} into K folds. `assignment[i]` is the 0-based
// fold of unit i; `members[k]` lists the units of fold k in increasing order.
struct FoldPlan {
  int K = 0;
  std::vector<int> assignment;
  std::vector<std::vector<std::size_t>> members;
  int split_id = 0;
  std::uint64_t seed = 0;

  std::size_t fold_size(int k) const { return members.at(k).size(); }
  // Units outside fold k, in increasing order.
  std::vector<std::size_t> Complement(int k) const;
};

// Seeded shuffle followed by a block split. With cluster ids, whole clusters
// are shuffled and dealt greedily to the currently smallest fold so no cluster
// straddles two folds. Deterministic in (seed, split_id).
FoldPlan MakeFolds(std::size_t n, int K, std::uint64_t seed, int split_id = 0,
                   std::span<const std::int64_t> cluster_id = {});

// Throws vcate::Error (OverlapViolation, NonBinaryTreatment, NonFiniteValue,
// InvalidArgument) naming the first offending index.
void ValidateDataset(const Dataset& ds, double delta);

// Rows of `ds` restricted to `rows`, in the given order.
Dataset Subset(const Dataset& ds, std::span<const std::size_t> rows);

}  // namespace vcate

#endif  // VCATE_DATA_MODEL_H_
