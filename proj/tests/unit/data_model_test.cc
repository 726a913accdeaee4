#include "vcate/data_model.h"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <string>
#include <vector>

#include <gtest/gtest.h>

#include "test_util.h"
#include "vcate/errors.h"

namespace vcate {
namespace {

ErrorCode CodeOf(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  return ErrorCode::kOk;
}

TEST(MakeFoldsTest, PartitionsAllUnitsIntoBalancedFolds) {
  const FoldPlan plan = MakeFolds(103, 4, 7);
  ASSERT_EQ(plan.members.size(), 4u);
  std::vector<int> seen(103, 0);
  for (int k = 0; k < 4; ++k) {
    EXPECT_TRUE(std::is_sorted(plan.members[k].begin(), plan.members[k].end()));
    EXPECT_GE(plan.fold_size(k), 25u);
    EXPECT_LE(plan.fold_size(k), 26u);
    for (std::size_t i : plan.members[k]) {
      ++seen[i];
      EXPECT_EQ(plan.assignment[i], k);
    }
  }
  EXPECT_TRUE(std::all_of(seen.begin(), seen.end(), [](int c) { return c == 1; }));
}

TEST(MakeFoldsTest, ComplementIsTheOtherFolds) {
  const FoldPlan plan = MakeFolds(40, 3, 1);
  const std::vector<std::size_t> comp = plan.Complement(1);
  EXPECT_EQ(comp.size(), 40 - plan.fold_size(1));
  for (std::size_t i : comp) EXPECT_NE(plan.assignment[i], 1);
  EXPECT_TRUE(std::is_sorted(comp.begin(), comp.end()));
}

TEST(MakeFoldsTest, DeterministicInSeedAndSplit) {
  EXPECT_EQ(MakeFolds(50, 2, 3, 0).assignment, MakeFolds(50, 2, 3, 0).assignment);
  EXPECT_NE(MakeFolds(50, 2, 3, 0).assignment, MakeFolds(50, 2, 3, 1).assignment);
  EXPECT_NE(MakeFolds(50, 2, 3, 0).assignment, MakeFolds(50, 2, 4, 0).assignment);
}

TEST(MakeFoldsTest, ClustersNeverStraddleFolds) {
  std::vector<std::int64_t> cid;
  for (int c = 0; c < 30; ++c) {
    for (int j = 0; j <= c % 4; ++j) cid.push_back(100 + c);
  }
  const FoldPlan plan = MakeFolds(cid.size(), 3, 11, 0, cid);
  for (std::size_t i = 0; i < cid.size(); ++i) {
    for (std::size_t j = 0; j < cid.size(); ++j) {
      if (cid[i] == cid[j]) EXPECT_EQ(plan.assignment[i], plan.assignment[j]);
    }
  }
  for (int k = 0; k < 3; ++k) EXPECT_GT(plan.fold_size(k), 0u);
}

TEST(MakeFoldsTest, RejectsBadArguments) {
  EXPECT_EQ(CodeOf([] { MakeFolds(10, 1, 0); }), ErrorCode::kInvalidK);
  EXPECT_EQ(CodeOf([] { MakeFolds(3, 2, 0); }), ErrorCode::kTooFewUnits);
  const std::vector<std::int64_t> three = {1, 1, 2, 2, 3, 3};
  EXPECT_EQ(CodeOf([&] { MakeFolds(6, 2, 0, 0, three); }), ErrorCode::kTooFewUnits);
  const std::vector<std::int64_t> short_ids = {1, 2};
  EXPECT_EQ(CodeOf([&] { MakeFolds(6, 2, 0, 0, short_ids); }), ErrorCode::kInvalidArgument);
}

TEST(ValidateDatasetTest, AcceptsCleanData) {
  const Dataset ds = testing::LinearExperiment(20, 3, 0.1, 1);
  EXPECT_NO_THROW(ValidateDataset(ds, 0.01));
}

TEST(ValidateDatasetTest, ReportsEachViolation) {
  const Dataset base = testing::LinearExperiment(20, 3, 0.1, 1);
  Dataset ds = base;
  ds.pscore[4] = 0.005;
  EXPECT_EQ(CodeOf([&] { ValidateDataset(ds, 0.01); }), ErrorCode::kOverlapViolation);
  ds = base;
  ds.d[2] = 2;
  EXPECT_EQ(CodeOf([&] { ValidateDataset(ds, 0.01); }), ErrorCode::kNonBinaryTreatment);
  ds = base;
  ds.x(3, 1) = std::numeric_limits<double>::quiet_NaN();
  EXPECT_EQ(CodeOf([&] { ValidateDataset(ds, 0.01); }), ErrorCode::kNonFiniteValue);
  ds = base;
  ds.y[0] = std::numeric_limits<double>::infinity();
  EXPECT_EQ(CodeOf([&] { ValidateDataset(ds, 0.01); }), ErrorCode::kNonFiniteValue);
  ds = base;
  ds.d.pop_back();
  EXPECT_EQ(CodeOf([&] { ValidateDataset(ds, 0.01); }), ErrorCode::kInvalidArgument);
  EXPECT_EQ(CodeOf([&] { ValidateDataset(base, 0.5); }), ErrorCode::kInvalidArgument);
}

TEST(ValidateDatasetTest, MessageNamesOffendingIndex) {
  Dataset ds = testing::LinearExperiment(20, 3, 0.1, 1);
  ds.pscore[7] = 0.999;
  try {
    ValidateDataset(ds, 0.01);
    FAIL();
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find("7"), std::string::npos);
  }
}

TEST(SubsetTest, KeepsRowsInOrder) {
  Dataset ds = testing::LinearExperiment(10, 2, 0.1, 2);
  ds.cluster_id = std::vector<std::int64_t>{0, 1, 2, 3, 4, 5, 6, 7, 8, 9};
  const std::vector<std::size_t> rows = {7, 2, 5};
  const Dataset sub = Subset(ds, rows);
  ASSERT_EQ(sub.n(), 3u);
  for (std::size_t r = 0; r < rows.size(); ++r) {
    EXPECT_EQ(sub.y[r], ds.y[rows[r]]);
    EXPECT_EQ(sub.d[r], ds.d[rows[r]]);
    EXPECT_EQ(sub.x.row(r), ds.x.row(rows[r]));
    EXPECT_EQ((*sub.cluster_id)[r], static_cast<std::int64_t>(rows[r]));
  }
}

}  // namespace
}  // namespace vcate
