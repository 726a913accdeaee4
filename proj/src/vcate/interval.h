#ifndef VCATE_INTERVAL_H_
#define VCATE_INTERVAL_H_

namespace vcate {

enum class CiKind {
  kSingleFold,
  kDegenerate,
  kMultifold,
  kSqrtTransformed,
  kNaiveNormal,
};

const char* CiKindName(CiKind kind);

struct ConfidenceInterval {
  double lo = 0.0;
  double hi = 0.0;
  double alpha = 0.05;
  CiKind kind = CiKind::kSingleFold;
  // 0-based provenance; -1 when the interval aggregates several folds.
  int fold = -1;
  int split = -1;
  // The accepted set was not connected; [lo, hi] is its hull.
  bool hull = false;

  bool Contains(double v) const { return lo <= v && v <= hi; }
  double length() const { return hi - lo; }
};

}  // namespace vcate

#endif  // VCATE_INTERVAL_H_
