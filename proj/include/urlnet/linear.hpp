#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "urlnet/baseline.hpp"

namespace urlnet {

struct LinearModel {
  std::vector<double> weights;
  double bias = 0.0;
  double l1_lambda = 0.0;

  std::size_t nonzero_weights() const;
};

struct LinearTrainOptions {
  double l1_lambda = 1.0;
  int epochs = 300;
  // Step size per unit of average loss; the step on the summed objective is
  // learning_rate / N.
  double learning_rate = 0.5;
  std::uint64_t seed = 0;
};

// Minimizes sum_i max(0, 1 - y_i (w.x_i + b))^2 + l1_lambda * |w|_1 by
// proximal gradient descent: a full gradient step on the squared hinge loss
// followed by soft-thresholding of w (the bias is not penalized). labels are
// +1 / -1.
LinearModel train_linear_l1(std::span<const SparseFeatureVector> xs, std::span<const int> labels,
                            const LinearTrainOptions& options);

// w.x + b
double predict_linear(const LinearModel& model, const SparseFeatureVector& x);

// Objective value, for tests and diagnostics.
double squared_hinge_objective(const LinearModel& model, std::span<const SparseFeatureVector> xs,
                               std::span<const int> labels);

}  // namespace urlnet
