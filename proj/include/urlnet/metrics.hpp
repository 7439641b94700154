#pragma once

#include <cstdint>
#include <iosfwd>
#include <limits>
#include <span>
#include <vector>

#include "json.hpp"
#include "urlnet/tensor.hpp"

namespace urlnet {

struct RocPoint {
  double threshold;
  double fpr;
  double tpr;
  std::int64_t false_positives = 0;
  std::int64_t true_positives = 0;
};

// Points sorted by descending threshold, starting at (0, 0) for +inf and ending
// at (1, 1). A score is classified positive when score >= threshold.
struct RocCurve {
  std::vector<RocPoint> points;
  std::int64_t positives = 0;
  std::int64_t negatives = 0;
};

// labels are +1 / -1 (0 is accepted as -1).
RocCurve roc_curve(std::span<const double> scores, std::span<const int> labels);
RocCurve roc_curve(std::span<const float> scores, std::span<const int> labels);

// Trapezoidal area under the curve; equals P(s+ > s-) + P(s+ == s-) / 2.
double auc(const RocCurve& curve);

// Largest TPR among curve points with FPR <= fpr_level (step-function reading).
double tpr_at_fpr(const RocCurve& curve, double fpr_level);

inline constexpr double kReportFprLevels[] = {1e-4, 1e-3, 1e-2, 1e-1};

// {"auc": ..., "tpr@1e-4": ..., "tpr@1e-3": ..., "tpr@1e-2": ..., "tpr@1e-1": ...}
nlohmann::json metrics_report(const RocCurve& curve);
// CSV "threshold,fpr,tpr".
void write_roc_csv(std::ostream& os, const RocCurve& curve);

}  // namespace urlnet
