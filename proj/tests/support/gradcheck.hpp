#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <vector>

#include "urlnet/graph.hpp"

namespace urlnet::testing {

struct GradCheckResult {
  double max_rel_error = 0.0;
  std::size_t checked = 0;
  // Coordinates where the one-sided differences disagree, i.e. the step
  // crossed a ReLU or max-pool switch.
  std::size_t kinks = 0;
};

// loss(g) records a scalar loss on g using g.parameter(*leaf) for each leaf.
using LossBuilder = std::function<Var(Graph&)>;

inline double loss_value(const LossBuilder& build) {
  Graph g(false);
  return static_cast<double>(g.value(build(g)).item());
}

// Compares backprop gradients of every leaf entry against central finite
// differences. Relative error is |a - n| / max(|a| + |n|, floor).
inline GradCheckResult check_gradients(const std::vector<Tensor*>& leaves, const LossBuilder& build,
                                       double step = 1e-5, double floor = 1e-6) {
  for (Tensor* t : leaves) {
    t->set_requires_grad(true);
    t->zero_grad();
  }
  {
    Graph g;
    g.backward(build(g));
  }
  GradCheckResult r;
  const double f0 = loss_value(build);
  for (Tensor* t : leaves) {
    const std::vector<Scalar> analytic(t->grad().begin(), t->grad().end());
    for (std::size_t i = 0; i < t->size(); ++i) {
      const Scalar saved = (*t)[i];
      (*t)[i] = saved + step;
      const double fp = loss_value(build);
      (*t)[i] = saved - step;
      const double fm = loss_value(build);
      (*t)[i] = saved;
      const double central = (fp - fm) / (2 * step);
      const double forward = (fp - f0) / step;
      const double backward = (f0 - fm) / step;
      const double gap = std::abs(forward - backward);
      if (gap > 1e-3 * (1.0 + std::abs(central)) ||
          (gap > 1e-10 && gap > 1e-2 * (std::abs(forward) + std::abs(backward)))) {
        ++r.kinks;
        continue;
      }
      const double a = analytic[i];
      const double rel = std::abs(a - central) / std::max(std::abs(a) + std::abs(central), floor);
      r.max_rel_error = std::max(r.max_rel_error, rel);
      ++r.checked;
    }
  }
  return r;
}

}  // namespace urlnet::testing
