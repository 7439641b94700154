#include "urlnet/ops.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <string>

#include "urlnet/error.hpp"

namespace urlnet::ops {

namespace {

using MatR = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MapR = Eigen::Map<MatR>;
using CMapR = Eigen::Map<const MatR>;
using StridedCMapR = Eigen::Map<const MatR, 0, Eigen::OuterStride<>>;
using VecMap = Eigen::Map<Eigen::Matrix<Scalar, Eigen::Dynamic, 1>>;
using CVecMap = Eigen::Map<const Eigen::Matrix<Scalar, Eigen::Dynamic, 1>>;

std::int64_t leading(const Shape& s, std::size_t trailing) {
  std::int64_t n = 1;
  for (std::size_t i = 0; i + trailing < s.size(); ++i) n *= s[i];
  return n;
}

Shape with_tail(const Shape& s, std::size_t drop, std::initializer_list<std::int64_t> tail) {
  Shape out(s.begin(), s.end() - static_cast<std::ptrdiff_t>(drop));
  out.insert(out.end(), tail);
  return out;
}

void require(bool ok, const std::string& msg) {
  if (!ok) throw DataError(msg);
}

}  // namespace

Scalar sigmoid(Scalar z) {
  if (z >= 0) return Scalar(1) / (Scalar(1) + std::exp(-z));
  const Scalar e = std::exp(z);
  return e / (Scalar(1) + e);
}

Scalar bce_value(Scalar z, int label) {
  // max(z, 0) - z*y + log(1 + exp(-|z|))
  return std::max(z, Scalar(0)) - z * static_cast<Scalar>(label) + std::log1p(std::exp(-std::abs(z)));
}

Var embedding_lookup(Graph& g, Var table, std::span<const int> ids, const Shape& ids_shape) {
  const Tensor& em = g.value(table);
  require(em.rank() == 2, "embedding_lookup: table must be 2-d, got " + shape_string(em.shape()));
  require(shape_size(ids_shape) == static_cast<std::int64_t>(ids.size()),
          "embedding_lookup: ids do not match ids_shape");
  const std::int64_t m = em.dim(0), k = em.dim(1);
  for (std::size_t i = 0; i < ids.size(); ++i) {
    if (ids[i] < 0 || ids[i] >= m) {
      throw DataError("embedding_lookup: id " + std::to_string(ids[i]) + " at index " + std::to_string(i) +
                      " is outside [0, " + std::to_string(m) + ")");
    }
  }
  Shape out_shape = ids_shape;
  out_shape.push_back(k);
  Tensor out(out_shape);
  for (std::size_t i = 0; i < ids.size(); ++i) {
    std::copy_n(em.ptr() + ids[i] * k, k, out.ptr() + i * k);
  }
  std::vector<int> saved(ids.begin(), ids.end());
  const Var inputs[] = {table};
  return g.record("embedding_lookup", inputs, std::move(out), [table, saved = std::move(saved), k](Graph& gr, Var self) {
    auto dt = gr.grad(table);
    auto dy = gr.grad(self);
    for (std::size_t i = 0; i < saved.size(); ++i) {
      Scalar* row = dt.data() + saved[i] * k;
      const Scalar* src = dy.data() + i * k;
      for (std::int64_t c = 0; c < k; ++c) row[c] += src[c];
    }
  });
}

Var embedding_sum(Graph& g, Var table, std::span<const int> ids, const Shape& ids_shape, int skip_id) {
  const Tensor& em = g.value(table);
  require(em.rank() == 2, "embedding_sum: table must be 2-d");
  require(!ids_shape.empty(), "embedding_sum: ids need at least one axis");
  require(shape_size(ids_shape) == static_cast<std::int64_t>(ids.size()), "embedding_sum: ids do not match ids_shape");
  const std::int64_t m = em.dim(0), k = em.dim(1);
  const std::int64_t len = ids_shape.back();
  const std::int64_t rows = len == 0 ? 0 : static_cast<std::int64_t>(ids.size()) / len;
  for (std::size_t i = 0; i < ids.size(); ++i) {
    if (ids[i] < 0 || ids[i] >= m) {
      throw DataError("embedding_sum: id " + std::to_string(ids[i]) + " at index " + std::to_string(i) +
                      " is outside [0, " + std::to_string(m) + ")");
    }
  }
  Shape out_shape(ids_shape.begin(), ids_shape.end() - 1);
  out_shape.push_back(k);
  Tensor out(out_shape);
  for (std::int64_t r = 0; r < rows; ++r) {
    Scalar* dst = out.ptr() + r * k;
    for (std::int64_t j = 0; j < len; ++j) {
      const int id = ids[r * len + j];
      if (id == skip_id) continue;
      const Scalar* src = em.ptr() + id * k;
      for (std::int64_t c = 0; c < k; ++c) dst[c] += src[c];
    }
  }
  std::vector<int> saved(ids.begin(), ids.end());
  const Var inputs[] = {table};
  return g.record("embedding_sum", inputs, std::move(out),
                  [table, saved = std::move(saved), k, len, rows, skip_id](Graph& gr, Var self) {
                    auto dt = gr.grad(table);
                    auto dy = gr.grad(self);
                    for (std::int64_t r = 0; r < rows; ++r) {
                      const Scalar* src = dy.data() + r * k;
                      for (std::int64_t j = 0; j < len; ++j) {
                        const int id = saved[r * len + j];
                        if (id == skip_id) continue;
                        Scalar* row = dt.data() + id * k;
                        for (std::int64_t c = 0; c < k; ++c) row[c] += src[c];
                      }
                    }
                  });
}

Var conv1d(Graph& g, Var x, Var filters, Var bias, Activation act) {
  const Tensor& xv = g.value(x);
  const Tensor& wv = g.value(filters);
  const Tensor& bv = g.value(bias);
  require(xv.rank() >= 2, "conv1d: input must be [..., L, k]");
  require(wv.rank() == 3, "conv1d: filters must be [h, k, F]");
  const std::int64_t len = xv.dim(xv.rank() - 2), k = xv.dim(xv.rank() - 1);
  const std::int64_t h = wv.dim(0), nf = wv.dim(2);
  require(wv.dim(1) == k, "conv1d: filter depth " + std::to_string(wv.dim(1)) + " != embedding size " + std::to_string(k));
  require(bv.size() == static_cast<std::size_t>(nf), "conv1d: bias must have one entry per filter");
  if (h > len) {
    throw DataError("conv1d: filter width " + std::to_string(h) + " exceeds sequence length " + std::to_string(len));
  }
  const std::int64_t batch = leading(xv.shape(), 2);
  const std::int64_t steps = len - h + 1;
  // Windows of h consecutive rows are contiguous in a row-major [L, k] block, so the
  // im2col matrix is a strided view over the flattened batch. Rows that straddle two
  // examples are computed and discarded.
  const std::int64_t rows = batch * len - h + 1;
  StridedCMapR windows(xv.ptr(), rows, h * k, Eigen::OuterStride<>(k));
  CMapR w(wv.ptr(), h * k, nf);
  MatR full = windows * w;

  Tensor out(with_tail(xv.shape(), 2, {steps, nf}));
  MapR o(out.ptr(), batch * steps, nf);
  for (std::int64_t b = 0; b < batch; ++b) {
    o.middleRows(b * steps, steps) = full.middleRows(b * len, steps);
  }
  o.rowwise() += CVecMap(bv.ptr(), nf).transpose();
  if (act == Activation::relu) o = o.cwiseMax(Scalar(0));

  const Var inputs[] = {x, filters, bias};
  return g.record("conv1d", inputs, std::move(out),
                  [x, filters, bias, act, batch, len, k, h, nf, steps, rows](Graph& gr, Var self) {
                    const Tensor& yv = gr.value(self);
                    MatR dpre = CMapR(gr.grad(self).data(), batch * steps, nf);
                    if (act == Activation::relu) {
                      dpre = (CMapR(yv.ptr(), batch * steps, nf).array() > Scalar(0)).select(dpre, Scalar(0));
                    }
                    if (auto db = gr.grad(bias); !db.empty()) {
                      VecMap(db.data(), nf) += dpre.colwise().sum().transpose();
                    }
                    MatR dfull = MatR::Zero(rows, nf);
                    for (std::int64_t b = 0; b < batch; ++b) {
                      dfull.middleRows(b * len, steps) = dpre.middleRows(b * steps, steps);
                    }
                    const Tensor& xv2 = gr.value(x);
                    const Tensor& wv2 = gr.value(filters);
                    if (auto dw = gr.grad(filters); !dw.empty()) {
                      StridedCMapR windows2(xv2.ptr(), rows, h * k, Eigen::OuterStride<>(k));
                      MapR(dw.data(), h * k, nf).noalias() += windows2.transpose() * dfull;
                    }
                    if (auto dx = gr.grad(x); !dx.empty()) {
                      MapR dxm(dx.data(), batch * len, k);
                      CMapR w2(wv2.ptr(), h * k, nf);
                      for (std::int64_t j = 0; j < h; ++j) {
                        dxm.middleRows(j, rows).noalias() += dfull * w2.middleRows(j * k, k).transpose();
                      }
                    }
                  });
}

Var global_max_pool(Graph& g, Var c) {
  const Tensor& cv = g.value(c);
  require(cv.rank() >= 2, "global_max_pool: input must be [..., T, F]");
  const std::int64_t steps = cv.dim(cv.rank() - 2), nf = cv.dim(cv.rank() - 1);
  if (steps < 1) throw DataError("global_max_pool: empty temporal axis");
  const std::int64_t batch = leading(cv.shape(), 2);
  Tensor out(with_tail(cv.shape(), 2, {nf}));
  std::vector<std::int64_t> argmax(static_cast<std::size_t>(batch * nf));
  for (std::int64_t b = 0; b < batch; ++b) {
    const Scalar* base = cv.ptr() + b * steps * nf;
    Scalar* dst = out.ptr() + b * nf;
    std::int64_t* arg = argmax.data() + b * nf;
    for (std::int64_t f = 0; f < nf; ++f) {
      dst[f] = base[f];
      arg[f] = 0;
    }
    for (std::int64_t t = 1; t < steps; ++t) {
      const Scalar* row = base + t * nf;
      for (std::int64_t f = 0; f < nf; ++f) {
        if (row[f] > dst[f]) {
          dst[f] = row[f];
          arg[f] = t;
        }
      }
    }
  }
  const Var inputs[] = {c};
  return g.record("global_max_pool", inputs, std::move(out),
                  [c, argmax = std::move(argmax), batch, steps, nf](Graph& gr, Var self) {
                    auto dc = gr.grad(c);
                    auto dy = gr.grad(self);
                    for (std::int64_t b = 0; b < batch; ++b) {
                      for (std::int64_t f = 0; f < nf; ++f) {
                        const auto t = argmax[b * nf + f];
                        dc[(b * steps + t) * nf + f] += dy[b * nf + f];
                      }
                    }
                  });
}

Var dense(Graph& g, Var x, Var weight, Var bias, Activation act) {
  const Tensor& xv = g.value(x);
  const Tensor& wv = g.value(weight);
  const Tensor& bv = g.value(bias);
  require(xv.rank() >= 1, "dense: input must be [..., n]");
  require(wv.rank() == 2, "dense: weight must be [m, n]");
  const std::int64_t n = xv.dim(xv.rank() - 1), m = wv.dim(0);
  if (wv.dim(1) != n || bv.size() != static_cast<std::size_t>(m)) {
    throw DataError("dense: shape mismatch, input " + shape_string(xv.shape()) + ", weight " +
                    shape_string(wv.shape()) + ", bias " + shape_string(bv.shape()));
  }
  const std::int64_t batch = leading(xv.shape(), 1);
  Tensor out(with_tail(xv.shape(), 1, {m}));
  MapR o(out.ptr(), batch, m);
  o.noalias() = CMapR(xv.ptr(), batch, n) * CMapR(wv.ptr(), m, n).transpose();
  o.rowwise() += CVecMap(bv.ptr(), m).transpose();
  if (act == Activation::relu) o = o.cwiseMax(Scalar(0));
  const Var inputs[] = {x, weight, bias};
  return g.record("dense", inputs, std::move(out), [x, weight, bias, act, batch, n, m](Graph& gr, Var self) {
    const Tensor& yv = gr.value(self);
    MatR dpre = CMapR(gr.grad(self).data(), batch, m);
    if (act == Activation::relu) {
      dpre = (CMapR(yv.ptr(), batch, m).array() > Scalar(0)).select(dpre, Scalar(0));
    }
    if (auto db = gr.grad(bias); !db.empty()) VecMap(db.data(), m) += dpre.colwise().sum().transpose();
    if (auto dw = gr.grad(weight); !dw.empty()) {
      MapR(dw.data(), m, n).noalias() += dpre.transpose() * CMapR(gr.value(x).ptr(), batch, n);
    }
    if (auto dx = gr.grad(x); !dx.empty()) {
      MapR(dx.data(), batch, n).noalias() += dpre * CMapR(gr.value(weight).ptr(), m, n);
    }
  });
}

Var dropout(Graph& g, Var x, double rate, bool train, std::mt19937_64& rng) {
  if (!(rate >= 0.0 && rate < 1.0)) throw DataError("dropout: rate must be in [0, 1), got " + std::to_string(rate));
  if (!train || rate == 0.0) return x;
  const Tensor& xv = g.value(x);
  const Scalar scale = static_cast<Scalar>(1.0 / (1.0 - rate));
  std::vector<Scalar> mask(xv.size());
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  for (auto& m : mask) m = uni(rng) < rate ? Scalar(0) : scale;
  Tensor out(xv.shape());
  for (std::size_t i = 0; i < mask.size(); ++i) out[i] = xv[i] * mask[i];
  const Var inputs[] = {x};
  return g.record("dropout", inputs, std::move(out), [x, mask = std::move(mask)](Graph& gr, Var self) {
    auto dx = gr.grad(x);
    auto dy = gr.grad(self);
    for (std::size_t i = 0; i < mask.size(); ++i) dx[i] += dy[i] * mask[i];
  });
}

Var bce_with_logits(Graph& g, Var logits, std::span<const int> labels, double pos_weight) {
  const Tensor& z = g.value(logits);
  require(z.size() == labels.size(), "bce_with_logits: " + std::to_string(labels.size()) + " labels for " +
                                         std::to_string(z.size()) + " logits");
  require(!labels.empty(), "bce_with_logits: empty batch");
  require(pos_weight >= 0.0, "bce_with_logits: pos_weight must be non-negative");
  for (int y : labels) {
    if (y != 0 && y != 1) throw DataError("bce_with_logits: label " + std::to_string(y) + " is not 0 or 1");
  }
  const auto n = static_cast<Scalar>(labels.size());
  Scalar total = 0;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const Scalar w = labels[i] == 1 ? static_cast<Scalar>(pos_weight) : Scalar(1);
    total += w * bce_value(z[i], labels[i]);
  }
  std::vector<int> saved(labels.begin(), labels.end());
  const Var inputs[] = {logits};
  return g.record("bce_with_logits", inputs, Tensor::scalar(total / n),
                  [logits, saved = std::move(saved), n, pos_weight](Graph& gr, Var self) {
                    const Scalar up = gr.grad(self)[0];
                    const Tensor& zv = gr.value(logits);
                    auto dz = gr.grad(logits);
                    for (std::size_t i = 0; i < saved.size(); ++i) {
                      const Scalar w = saved[i] == 1 ? static_cast<Scalar>(pos_weight) : Scalar(1);
                      dz[i] += up * w * (sigmoid(zv[i]) - static_cast<Scalar>(saved[i])) / n;
                    }
                  });
}

Var add(Graph& g, Var a, Var b) {
  const Tensor& av = g.value(a);
  const Tensor& bv = g.value(b);
  if (av.shape() != bv.shape()) {
    throw DataError("add: shape mismatch " + shape_string(av.shape()) + " vs " + shape_string(bv.shape()));
  }
  Tensor out(av.shape());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = av[i] + bv[i];
  const Var inputs[] = {a, b};
  return g.record("add", inputs, std::move(out), [a, b](Graph& gr, Var self) {
    auto dy = gr.grad(self);
    for (Var v : {a, b}) {
      if (auto dv = gr.grad(v); !dv.empty()) {
        for (std::size_t i = 0; i < dy.size(); ++i) dv[i] += dy[i];
      }
    }
  });
}

Var mul(Graph& g, Var a, Var b) {
  const Tensor& av = g.value(a);
  const Tensor& bv = g.value(b);
  if (av.shape() != bv.shape()) {
    throw DataError("mul: shape mismatch " + shape_string(av.shape()) + " vs " + shape_string(bv.shape()));
  }
  Tensor out(av.shape());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = av[i] * bv[i];
  const Var inputs[] = {a, b};
  return g.record("mul", inputs, std::move(out), [a, b](Graph& gr, Var self) {
    auto dy = gr.grad(self);
    const Tensor& av2 = gr.value(a);
    const Tensor& bv2 = gr.value(b);
    if (auto da = gr.grad(a); !da.empty()) {
      for (std::size_t i = 0; i < dy.size(); ++i) da[i] += dy[i] * bv2[i];
    }
    if (auto db = gr.grad(b); !db.empty()) {
      for (std::size_t i = 0; i < dy.size(); ++i) db[i] += dy[i] * av2[i];
    }
  });
}

Var sum(Graph& g, Var x) {
  const Tensor& xv = g.value(x);
  Scalar total = 0;
  for (Scalar v : xv.data()) total += v;
  const Var inputs[] = {x};
  return g.record("sum", inputs, Tensor::scalar(total), [x](Graph& gr, Var self) {
    const Scalar up = gr.grad(self)[0];
    for (Scalar& d : gr.grad(x)) d += up;
  });
}

Var reshape(Graph& g, Var x, const Shape& shape) {
  Tensor out = g.value(x).reshaped(shape);
  const Var inputs[] = {x};
  return g.record("reshape", inputs, std::move(out), [x](Graph& gr, Var self) {
    auto dx = gr.grad(x);
    auto dy = gr.grad(self);
    for (std::size_t i = 0; i < dy.size(); ++i) dx[i] += dy[i];
  });
}

Var concat_last(Graph& g, std::span<const Var> parts) {
  require(!parts.empty(), "concat_last: nothing to concatenate");
  const Shape& first = g.value(parts[0]).shape();
  require(!first.empty(), "concat_last: inputs must have at least one axis");
  const std::int64_t batch = leading(first, 1);
  std::vector<std::int64_t> widths;
  std::int64_t total = 0;
  for (Var p : parts) {
    const Shape& s = g.value(p).shape();
    require(s.size() == first.size() && std::equal(s.begin(), s.end() - 1, first.begin()),
            "concat_last: leading axes differ");
    widths.push_back(s.back());
    total += s.back();
  }
  Tensor out(with_tail(first, 1, {total}));
  std::int64_t offset = 0;
  for (std::size_t p = 0; p < parts.size(); ++p) {
    const Tensor& v = g.value(parts[p]);
    for (std::int64_t b = 0; b < batch; ++b) {
      std::copy_n(v.ptr() + b * widths[p], widths[p], out.ptr() + b * total + offset);
    }
    offset += widths[p];
  }
  std::vector<Var> saved(parts.begin(), parts.end());
  return g.record("concat_last", parts, std::move(out),
                  [saved = std::move(saved), widths, batch, total](Graph& gr, Var self) {
                    auto dy = gr.grad(self);
                    std::int64_t offset = 0;
                    for (std::size_t p = 0; p < saved.size(); ++p) {
                      if (auto dp = gr.grad(saved[p]); !dp.empty()) {
                        for (std::int64_t b = 0; b < batch; ++b) {
                          for (std::int64_t c = 0; c < widths[p]; ++c) {
                            dp[b * widths[p] + c] += dy[b * total + offset + c];
                          }
                        }
                      }
                      offset += widths[p];
                    }
                  });
}

}  // namespace urlnet::ops
