#include "urlnet/graph.hpp"

#include <cmath>
#include <string>

#include "urlnet/error.hpp"

namespace urlnet {

Var Graph::push(std::string_view op, Tensor* value, bool needs_grad, bool owned, BackwardFn fn) {
  nodes_.push_back(Node{op, value, needs_grad, owned, std::move(fn)});
  return Var{nodes_.size() - 1};
}

Var Graph::parameter(Tensor& t) {
  const bool needs = grad_enabled_ && t.requires_grad();
  return push("parameter", &t, needs, false, nullptr);
}

Var Graph::parameter(const Tensor& t) {
  // Read-only: the node never needs a gradient, so the tensor is never written.
  return push("parameter", const_cast<Tensor*>(&t), false, false, nullptr);
}

Var Graph::constant(Tensor t) {
  storage_.push_back(std::move(t));
  storage_.back().set_requires_grad(false);
  return push("constant", &storage_.back(), false, true, nullptr);
}

Var Graph::variable(Tensor t) {
  storage_.push_back(std::move(t));
  storage_.back().set_requires_grad(true);
  return push("variable", &storage_.back(), grad_enabled_, true, nullptr);
}

Var Graph::record(std::string_view op, std::span<const Var> inputs, Tensor out, BackwardFn backward) {
  if (!out.all_finite()) {
    throw NumericError("non-finite value produced by " + std::string(op));
  }
  bool needs = false;
  if (grad_enabled_) {
    for (Var v : inputs) needs = needs || nodes_.at(v.index).needs_grad;
  }
  storage_.push_back(std::move(out));
  return push(op, &storage_.back(), needs, true, needs ? std::move(backward) : BackwardFn{});
}

std::span<Scalar> Graph::grad(Var v) {
  Node& n = nodes_.at(v.index);
  if (!n.needs_grad) return {};
  return n.value->ensure_grad();
}

std::span<const Scalar> Graph::grad(Var v) const {
  const Node& n = nodes_.at(v.index);
  if (!n.needs_grad || !n.value->has_grad()) return {};
  return n.value->grad();
}

void Graph::backward(Var loss) {
  if (!grad_enabled_) throw DataError("backward() on a graph recorded without gradients");
  if (backward_done_) throw DataError("backward() called twice without reset_backward()");
  const Tensor& l = value(loss);
  if (l.size() != 1) throw DataError("backward() needs a scalar loss, got shape " + shape_string(l.shape()));
  backward_done_ = true;
  // Every gradient-carrying leaf ends up with a gradient buffer, even when disconnected.
  for (std::size_t i = 0; i <= loss.index; ++i) {
    if (nodes_[i].needs_grad && !nodes_[i].backward) nodes_[i].value->ensure_grad();
  }
  if (!nodes_[loss.index].needs_grad) return;
  grad(loss)[0] += Scalar(1);
  for (std::size_t i = loss.index + 1; i-- > 0;) {
    Node& n = nodes_[i];
    if (!n.needs_grad || !n.backward || !n.value->has_grad()) continue;
    n.backward(*this, Var{i});
  }
  for (std::size_t i = 0; i <= loss.index; ++i) {
    const Node& n = nodes_[i];
    if (!n.needs_grad || n.backward) continue;
    for (Scalar g : n.value->grad()) {
      if (!std::isfinite(g)) throw NumericError("non-finite gradient reached a leaf tensor");
    }
  }
}

void Graph::reset_backward() {
  for (auto& n : nodes_) {
    if (n.owned && n.backward) n.value->clear_grad();
  }
  backward_done_ = false;
}

}  // namespace urlnet
