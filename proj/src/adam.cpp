#include "urlnet/adam.hpp"

#include <cmath>
#include <span>
#include <string>

#include "urlnet/error.hpp"

namespace urlnet {

AdamState make_adam_state(const std::vector<Tensor*>& params, const AdamOptions& options) {
  AdamState state;
  state.options = options;
  for (const Tensor* p : params) {
    state.first_moment.emplace_back(p->size(), Scalar(0));
    state.second_moment.emplace_back(p->size(), Scalar(0));
  }
  return state;
}

void adam_step(const std::vector<Tensor*>& params, AdamState& state) {
  if (params.size() != state.first_moment.size()) {
    throw DataError("adam_step: " + std::to_string(params.size()) + " parameters but state holds " +
                    std::to_string(state.first_moment.size()));
  }
  if (state.step < 0) throw DataError("adam_step: negative step counter");
  for (std::size_t i = 0; i < params.size(); ++i) {
    if (params[i]->size() != state.first_moment[i].size()) {
      throw DataError("adam_step: parameter " + std::to_string(i) + " has shape " +
                      shape_string(params[i]->shape()) + " which does not match its moments");
    }
  }
  ++state.step;
  const auto& o = state.options;
  const double t = static_cast<double>(state.step);
  const double correct1 = 1.0 - std::pow(o.beta1, t);
  const double correct2 = 1.0 - std::pow(o.beta2, t);
  for (std::size_t i = 0; i < params.size(); ++i) {
    Tensor& p = *params[i];
    const bool has_grad = p.has_grad();
    std::span<const Scalar> g = has_grad ? std::span<const Scalar>(p.grad()) : std::span<const Scalar>();
    auto data = p.data();
    auto& m = state.first_moment[i];
    auto& v = state.second_moment[i];
    for (std::size_t j = 0; j < data.size(); ++j) {
      const double gj = has_grad ? static_cast<double>(g[j]) : 0.0;
      m[j] = static_cast<Scalar>(o.beta1 * m[j] + (1.0 - o.beta1) * gj);
      v[j] = static_cast<Scalar>(o.beta2 * v[j] + (1.0 - o.beta2) * gj * gj);
      const double mhat = m[j] / correct1;
      const double vhat = v[j] / correct2;
      data[j] -= static_cast<Scalar>(o.learning_rate * mhat / (std::sqrt(vhat) + o.epsilon));
    }
  }
}

}  // namespace urlnet
