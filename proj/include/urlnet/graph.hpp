#pragma once

#include <cstddef>
#include <deque>
#include <functional>
#include <limits>
#include <span>
#include <string_view>
#include <vector>

#include "urlnet/tensor.hpp"

namespace urlnet {

// Handle to a node of a Graph.
struct Var {
  static constexpr std::size_t npos = std::numeric_limits<std::size_t>::max();
  std::size_t index = npos;
  bool valid() const { return index != npos; }
};

// Append-only reverse-mode tape. Nodes are recorded in topological order by
// construction; backward() walks them in exact reverse order.
//
// A graph is confined to one thread. Parameters are referenced, not copied:
// their gradients accumulate into the parameter tensor's grad buffer.
class Graph {
 public:
  using BackwardFn = std::function<void(Graph&, Var self)>;

  // With grad_enabled=false no backward closures are kept and parameters are
  // treated as constants; used for inference.
  explicit Graph(bool grad_enabled = true) : grad_enabled_(grad_enabled) {}

  Graph(const Graph&) = delete;
  Graph& operator=(const Graph&) = delete;

  Var parameter(Tensor& t);
  Var parameter(const Tensor& t);  // never receives gradients
  Var constant(Tensor t);
  // Owned leaf that receives gradients; handy for tests and gradient checks.
  Var variable(Tensor t);

  Var record(std::string_view op, std::span<const Var> inputs, Tensor out, BackwardFn backward);

  const Tensor& value(Var v) const { return *nodes_.at(v.index).value; }
  bool needs_grad(Var v) const { return nodes_.at(v.index).needs_grad; }
  std::string_view op(Var v) const { return nodes_.at(v.index).op; }
  std::size_t size() const { return nodes_.size(); }
  bool grad_enabled() const { return grad_enabled_; }

  // Gradient of a node; allocates zeros on first access. Empty span when the
  // node does not need a gradient.
  std::span<Scalar> grad(Var v);
  std::span<const Scalar> grad(Var v) const;

  // Seeds d(loss)/d(loss) = 1 and runs every recorded backward closure in
  // reverse construction order. Errors on a non-scalar loss or a second call
  // without reset_backward().
  void backward(Var loss);
  // Clears intermediate gradients so backward() may run again. Parameter
  // gradients are left to the owner (see zero_grad on the model).
  void reset_backward();

 private:
  struct Node {
    std::string_view op;
    Tensor* value = nullptr;
    bool needs_grad = false;
    bool owned = false;
    BackwardFn backward;
  };

  Var push(std::string_view op, Tensor* value, bool needs_grad, bool owned, BackwardFn fn);

  std::deque<Tensor> storage_;
  std::vector<Node> nodes_;
  bool grad_enabled_;
  bool backward_done_ = false;
};

}  // namespace urlnet
