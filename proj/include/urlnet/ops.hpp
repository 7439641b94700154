#pragma once

#include <random>
#include <span>

#include "urlnet/graph.hpp"

// Differentiable primitives. Leading axes are treated as batch axes wherever a
// shape is written as [..., X].
namespace urlnet::ops {

enum class Activation { identity, relu };

// table [M, k], ids of shape ids_shape -> [ids_shape..., k]. Gradients scatter
// additively into the table rows.
Var embedding_lookup(Graph& g, Var table, std::span<const int> ids, const Shape& ids_shape);

// table [M, k], ids [..., L] -> [..., k]: sum of the L looked-up rows. Entries
// equal to skip_id contribute nothing (pass -1 to disable).
Var embedding_sum(Graph& g, Var table, std::span<const int> ids, const Shape& ids_shape, int skip_id);

// x [..., L, k], filters [h, k, F], bias [F] -> [..., L-h+1, F], stride 1:
// out[t, f] = act(sum_{j<h, c<k} x[t+j, c] * filters[j, c, f] + bias[f]).
Var conv1d(Graph& g, Var x, Var filters, Var bias, Activation act);

// c [..., T, F] -> [..., F]; the gradient goes to the first maximal position.
Var global_max_pool(Graph& g, Var c);

// x [..., n], weight [m, n], bias [m] -> [..., m] = act(x W^T + b).
Var dense(Graph& g, Var x, Var weight, Var bias, Activation act);

// Inverted dropout. Returns x itself in eval mode or when rate == 0.
Var dropout(Graph& g, Var x, double rate, bool train, std::mt19937_64& rng);

// Mean sigmoid cross-entropy over all logits; labels are 0/1. pos_weight
// scales the loss of positive examples.
Var bce_with_logits(Graph& g, Var logits, std::span<const int> labels, double pos_weight = 1.0);

Var add(Graph& g, Var a, Var b);
Var mul(Graph& g, Var a, Var b);
Var sum(Graph& g, Var x);
Var reshape(Graph& g, Var x, const Shape& shape);
Var concat_last(Graph& g, std::span<const Var> parts);

// Numerically stable elementwise helpers, also used by the loss.
Scalar sigmoid(Scalar z);
Scalar bce_value(Scalar z, int label);

}  // namespace urlnet::ops
