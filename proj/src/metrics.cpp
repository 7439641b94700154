#include "urlnet/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <ostream>
#include <string>

#include "urlnet/error.hpp"

namespace urlnet {

namespace {

template <typename T>
RocCurve roc_impl(std::span<const T> scores, std::span<const int> labels) {
  if (scores.size() != labels.size()) {
    throw DataError("roc_curve: " + std::to_string(scores.size()) + " scores but " + std::to_string(labels.size()) +
                    " labels");
  }
  RocCurve curve;
  for (int y : labels) {
    if (y == 1) {
      ++curve.positives;
    } else if (y == -1 || y == 0) {
      ++curve.negatives;
    } else {
      throw DataError("roc_curve: label " + std::to_string(y) + " is not +1/-1");
    }
  }
  if (curve.positives == 0 || curve.negatives == 0) {
    throw DataError("roc_curve: needs at least one positive and one negative label");
  }
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });
  const double p = static_cast<double>(curve.positives);
  const double n = static_cast<double>(curve.negatives);
  curve.points.push_back({std::numeric_limits<double>::infinity(), 0.0, 0.0, 0, 0});
  std::int64_t tp = 0, fp = 0;
  std::size_t i = 0;
  while (i < order.size()) {
    const double threshold = static_cast<double>(scores[order[i]]);
    while (i < order.size() && static_cast<double>(scores[order[i]]) == threshold) {
      if (labels[order[i]] == 1) {
        ++tp;
      } else {
        ++fp;
      }
      ++i;
    }
    curve.points.push_back({threshold, static_cast<double>(fp) / n, static_cast<double>(tp) / p, fp, tp});
  }
  return curve;
}

}  // namespace

RocCurve roc_curve(std::span<const double> scores, std::span<const int> labels) { return roc_impl(scores, labels); }

RocCurve roc_curve(std::span<const float> scores, std::span<const int> labels) { return roc_impl(scores, labels); }

double auc(const RocCurve& curve) {
  // Integrate with integer counts so the result equals pair counting exactly.
  const auto& pts = curve.points;
  const double p = static_cast<double>(curve.positives);
  const double n = static_cast<double>(curve.negatives);
  double twice_area = 0;  // integer-valued, in units of 1 / (P * N)
  for (std::size_t i = 1; i < pts.size(); ++i) {
    const auto dfp = static_cast<double>(pts[i].false_positives - pts[i - 1].false_positives);
    const auto tp_sum = static_cast<double>(pts[i].true_positives + pts[i - 1].true_positives);
    twice_area += dfp * tp_sum;
  }
  return twice_area / (2.0 * p * n);
}

double tpr_at_fpr(const RocCurve& curve, double fpr_level) {
  if (!(fpr_level > 0.0 && fpr_level < 1.0)) {
    throw DataError("tpr_at_fpr: level must be in (0, 1), got " + std::to_string(fpr_level));
  }
  double best = 0.0;
  for (const auto& pt : curve.points) {
    if (pt.fpr <= fpr_level) best = std::max(best, pt.tpr);
  }
  return best;
}

nlohmann::json metrics_report(const RocCurve& curve) {
  nlohmann::json j;
  j["auc"] = auc(curve);
  const char* keys[] = {"tpr@1e-4", "tpr@1e-3", "tpr@1e-2", "tpr@1e-1"};
  for (std::size_t i = 0; i < 4; ++i) j[keys[i]] = tpr_at_fpr(curve, kReportFprLevels[i]);
  j["positives"] = curve.positives;
  j["negatives"] = curve.negatives;
  return j;
}

void write_roc_csv(std::ostream& os, const RocCurve& curve) {
  os << "threshold,fpr,tpr\n";
  os.precision(17);
  for (const auto& pt : curve.points) {
    if (std::isinf(pt.threshold)) {
      os << "inf";
    } else {
      os << pt.threshold;
    }
    os << ',' << pt.fpr << ',' << pt.tpr << '\n';
  }
}

}  // namespace urlnet
