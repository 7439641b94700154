#pragma once

#include <deque>
#include <functional>
#include <memory>
#include <random>
#include <string>
#include <vector>

#include "gradcheck.hpp"
#include "urlnet/ops.hpp"

namespace urlnet::testing {

// A random differentiable-op instance: owned leaf tensors plus a scalar loss.
struct OpInstance {
  std::deque<Tensor> leaves;
  std::vector<int> ids;
  LossBuilder build;

  std::vector<Tensor*> leaf_ptrs() {
    std::vector<Tensor*> out;
    for (auto& t : leaves) out.push_back(&t);
    return out;
  }
};

struct OpCase {
  std::string name;
  std::function<std::unique_ptr<OpInstance>(std::mt19937_64&)> make;
};

inline Tensor random_tensor(std::mt19937_64& rng, Shape shape, double lo = -1.0, double hi = 1.0) {
  Tensor t(std::move(shape));
  std::uniform_real_distribution<double> u(lo, hi);
  for (auto& v : t.data()) v = static_cast<Scalar>(u(rng));
  return t;
}

inline int rand_int(std::mt19937_64& rng, int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); }

// sum(out * w) for a fixed random w, so every output entry reaches the loss.
inline Var project(Graph& g, Var out, const Tensor& w) {
  return ops::sum(g, ops::mul(g, out, g.constant(w.reshaped(g.value(out).shape()))));
}

inline std::vector<OpCase> op_cases() {
  using ops::Activation;
  std::vector<OpCase> cases;
  auto add_case = [&](std::string name, auto fn) { cases.push_back({std::move(name), fn}); };

  add_case("embedding_lookup", [](std::mt19937_64& rng) {
    auto in = std::make_unique<OpInstance>();
    const int m = rand_int(rng, 2, 6), k = rand_int(rng, 1, 4), b = rand_int(rng, 1, 3), len = rand_int(rng, 1, 5);
    Tensor& table = in->leaves.emplace_back(random_tensor(rng, {m, k}));
    for (int i = 0; i < b * len; ++i) in->ids.push_back(rand_int(rng, 0, m - 1));
    const Tensor w = random_tensor(rng, {b * len * k});
    auto* self = in.get();
    in->build = [self, &table, w, b, len](Graph& g) {
      return project(g, ops::embedding_lookup(g, g.parameter(table), self->ids, {b, len}), w);
    };
    return in;
  });
  add_case("embedding_sum", [](std::mt19937_64& rng) {
    auto in = std::make_unique<OpInstance>();
    const int m = rand_int(rng, 2, 6), k = rand_int(rng, 1, 4), rows = rand_int(rng, 1, 4), len = rand_int(rng, 1, 5);
    Tensor& table = in->leaves.emplace_back(random_tensor(rng, {m, k}));
    for (int i = 0; i < rows * len; ++i) in->ids.push_back(rand_int(rng, 0, m - 1));
    const Tensor w = random_tensor(rng, {rows * k});
    auto* self = in.get();
    in->build = [self, &table, w, rows, len](Graph& g) {
      return project(g, ops::embedding_sum(g, g.parameter(table), self->ids, {rows, len}, 0), w);
    };
    return in;
  });
  for (auto act : {Activation::identity, Activation::relu}) {
    add_case(act == Activation::relu ? "conv1d_relu" : "conv1d", [act](std::mt19937_64& rng) {
      auto in = std::make_unique<OpInstance>();
      const int b = rand_int(rng, 1, 2), h = rand_int(rng, 1, 4), len = rand_int(rng, h, 7), k = rand_int(rng, 1, 3),
                f = rand_int(rng, 1, 3);
      Tensor& x = in->leaves.emplace_back(random_tensor(rng, {b, len, k}));
      Tensor& filt = in->leaves.emplace_back(random_tensor(rng, {h, k, f}));
      Tensor& bias = in->leaves.emplace_back(random_tensor(rng, {f}));
      const Tensor w = random_tensor(rng, {b * (len - h + 1) * f});
      in->build = [&x, &filt, &bias, w, act](Graph& g) {
        return project(g, ops::conv1d(g, g.parameter(x), g.parameter(filt), g.parameter(bias), act), w);
      };
      return in;
    });
  }
  add_case("global_max_pool", [](std::mt19937_64& rng) {
    auto in = std::make_unique<OpInstance>();
    const int b = rand_int(rng, 1, 3), t = rand_int(rng, 1, 6), f = rand_int(rng, 1, 4);
    Tensor& x = in->leaves.emplace_back(random_tensor(rng, {b, t, f}));
    const Tensor w = random_tensor(rng, {b * f});
    in->build = [&x, w](Graph& g) { return project(g, ops::global_max_pool(g, g.parameter(x)), w); };
    return in;
  });
  for (auto act : {Activation::identity, Activation::relu}) {
    add_case(act == Activation::relu ? "dense_relu" : "dense", [act](std::mt19937_64& rng) {
      auto in = std::make_unique<OpInstance>();
      const int b = rand_int(rng, 1, 4), n = rand_int(rng, 1, 5), m = rand_int(rng, 1, 5);
      Tensor& x = in->leaves.emplace_back(random_tensor(rng, {b, n}));
      Tensor& wt = in->leaves.emplace_back(random_tensor(rng, {m, n}));
      Tensor& bias = in->leaves.emplace_back(random_tensor(rng, {m}));
      const Tensor w = random_tensor(rng, {b * m});
      in->build = [&x, &wt, &bias, w, act](Graph& g) {
        return project(g, ops::dense(g, g.parameter(x), g.parameter(wt), g.parameter(bias), act), w);
      };
      return in;
    });
  }
  add_case("dropout", [](std::mt19937_64& rng) {
    auto in = std::make_unique<OpInstance>();
    const int n = rand_int(rng, 1, 12);
    const double rate = std::uniform_real_distribution<double>(0.0, 0.9)(rng);
    const auto seed = rng();
    Tensor& x = in->leaves.emplace_back(random_tensor(rng, {n}));
    const Tensor w = random_tensor(rng, {n});
    in->build = [&x, w, rate, seed](Graph& g) {
      std::mt19937_64 mask_rng(seed);
      return project(g, ops::dropout(g, g.parameter(x), rate, true, mask_rng), w);
    };
    return in;
  });
  add_case("bce_with_logits", [](std::mt19937_64& rng) {
    auto in = std::make_unique<OpInstance>();
    const int n = rand_int(rng, 1, 8);
    const double pw = std::uniform_real_distribution<double>(0.5, 3.0)(rng);
    Tensor& z = in->leaves.emplace_back(random_tensor(rng, {n}, -4.0, 4.0));
    for (int i = 0; i < n; ++i) in->ids.push_back(rand_int(rng, 0, 1));
    auto* self = in.get();
    in->build = [self, &z, pw](Graph& g) { return ops::bce_with_logits(g, g.parameter(z), self->ids, pw); };
    return in;
  });
  for (const char* name : {"add", "mul"}) {
    const bool is_add = std::string(name) == "add";
    add_case(name, [is_add](std::mt19937_64& rng) {
      auto in = std::make_unique<OpInstance>();
      const Shape s{rand_int(rng, 1, 3), rand_int(rng, 1, 4)};
      Tensor& a = in->leaves.emplace_back(random_tensor(rng, s));
      Tensor& b = in->leaves.emplace_back(random_tensor(rng, s));
      const Tensor w = random_tensor(rng, {s[0] * s[1]});
      in->build = [&a, &b, w, is_add](Graph& g) {
        const Var va = g.parameter(a), vb = g.parameter(b);
        return project(g, is_add ? ops::add(g, va, vb) : ops::mul(g, va, vb), w);
      };
      return in;
    });
  }
  add_case("sum", [](std::mt19937_64& rng) {
    auto in = std::make_unique<OpInstance>();
    Tensor& x = in->leaves.emplace_back(random_tensor(rng, {rand_int(rng, 1, 4), rand_int(rng, 1, 4)}));
    in->build = [&x](Graph& g) {
      const Var v = g.parameter(x);
      return ops::sum(g, ops::mul(g, v, v));
    };
    return in;
  });
  add_case("reshape", [](std::mt19937_64& rng) {
    auto in = std::make_unique<OpInstance>();
    const int a = rand_int(rng, 1, 4), b = rand_int(rng, 1, 4);
    Tensor& x = in->leaves.emplace_back(random_tensor(rng, {a, b}));
    const Tensor w = random_tensor(rng, {a * b});
    in->build = [&x, w, a, b](Graph& g) { return project(g, ops::reshape(g, g.parameter(x), {b, a}), w); };
    return in;
  });
  add_case("concat_last", [](std::mt19937_64& rng) {
    auto in = std::make_unique<OpInstance>();
    const int rows = rand_int(rng, 1, 3), parts = rand_int(rng, 1, 3);
    int total = 0;
    for (int p = 0; p < parts; ++p) {
      const int c = rand_int(rng, 1, 3);
      total += c;
      in->leaves.emplace_back(random_tensor(rng, {rows, c}));
    }
    const Tensor w = random_tensor(rng, {rows * total});
    auto* self = in.get();
    in->build = [self, w](Graph& g) {
      std::vector<Var> vs;
      for (auto& t : self->leaves) vs.push_back(g.parameter(t));
      return project(g, ops::concat_last(g, vs), w);
    };
    return in;
  });
  return cases;
}

}  // namespace urlnet::testing
