#pragma once

#include <cstdint>
#include <vector>

#include "urlnet/tensor.hpp"

namespace urlnet {

struct AdamOptions {
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

// Per-parameter first/second moments plus the shared step counter.
struct AdamState {
  AdamOptions options;
  std::vector<std::vector<Scalar>> first_moment;
  std::vector<std::vector<Scalar>> second_moment;
  std::int64_t step = 0;
};

AdamState make_adam_state(const std::vector<Tensor*>& params, const AdamOptions& options = {});

// One bias-corrected Adam update of every parameter from its grad buffer.
// Parameters without a gradient are treated as having a zero gradient.
void adam_step(const std::vector<Tensor*>& params, AdamState& state);

}  // namespace urlnet
