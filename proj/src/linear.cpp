#include "urlnet/linear.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "urlnet/error.hpp"

namespace urlnet {

std::size_t LinearModel::nonzero_weights() const {
  return static_cast<std::size_t>(std::count_if(weights.begin(), weights.end(), [](double w) { return w != 0.0; }));
}

double predict_linear(const LinearModel& model, const SparseFeatureVector& x) {
  double s = model.bias;
  for (const auto& [i, v] : x.entries) {
    if (i < 0 || static_cast<std::size_t>(i) >= model.weights.size()) {
      throw DataError("predict_linear: feature index " + std::to_string(i) + " outside model dimension " +
                      std::to_string(model.weights.size()));
    }
    s += model.weights[static_cast<std::size_t>(i)] * v;
  }
  return s;
}

double squared_hinge_objective(const LinearModel& model, std::span<const SparseFeatureVector> xs,
                               std::span<const int> labels) {
  double total = 0.0;
  for (std::size_t n = 0; n < xs.size(); ++n) {
    const double slack = std::max(0.0, 1.0 - labels[n] * predict_linear(model, xs[n]));
    total += slack * slack;
  }
  double l1 = 0.0;
  for (double w : model.weights) l1 += std::abs(w);
  return total + model.l1_lambda * l1;
}

LinearModel train_linear_l1(std::span<const SparseFeatureVector> xs, std::span<const int> labels,
                            const LinearTrainOptions& options) {
  if (xs.size() != labels.size()) throw DataError("train_linear_l1: vectors and labels differ in length");
  if (xs.empty()) throw DataError("train_linear_l1: empty training set");
  if (options.l1_lambda < 0.0) throw DataError("train_linear_l1: l1_lambda must be non-negative");
  if (options.epochs < 1) throw DataError("train_linear_l1: epochs must be >= 1");
  std::size_t pos = 0, neg = 0;
  for (int y : labels) {
    if (y == 1) {
      ++pos;
    } else if (y == -1) {
      ++neg;
    } else {
      throw DataError("train_linear_l1: label " + std::to_string(y) + " is not +1/-1");
    }
  }
  if (pos == 0 || neg == 0) throw DataError("train_linear_l1: training data has a single class");

  const std::size_t dim = xs.front().dimension;
  for (const auto& x : xs) {
    if (x.dimension != dim) throw DataError("train_linear_l1: vectors differ in dimension");
  }
  LinearModel model;
  model.weights.assign(dim, 0.0);
  model.l1_lambda = options.l1_lambda;
  const double step = options.learning_rate / static_cast<double>(xs.size());
  const double threshold = step * options.l1_lambda;
  std::vector<double> grad(dim);
  for (int epoch = 0; epoch < options.epochs; ++epoch) {
    std::fill(grad.begin(), grad.end(), 0.0);
    double grad_bias = 0.0;
    for (std::size_t n = 0; n < xs.size(); ++n) {
      const double slack = 1.0 - labels[n] * predict_linear(model, xs[n]);
      if (slack <= 0.0) continue;
      const double coef = -2.0 * slack * labels[n];
      for (const auto& [i, v] : xs[n].entries) grad[static_cast<std::size_t>(i)] += coef * v;
      grad_bias += coef;
    }
    model.bias -= step * grad_bias;
    for (std::size_t i = 0; i < dim; ++i) {
      const double w = model.weights[i] - step * grad[i];
      model.weights[i] = w > threshold ? w - threshold : (w < -threshold ? w + threshold : 0.0);
    }
    if (!std::isfinite(model.bias)) throw NumericError("train_linear_l1: diverged at epoch " + std::to_string(epoch));
  }
  return model;
}

}  // namespace urlnet
