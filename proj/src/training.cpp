#include "urlnet/training.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <numeric>
#include <ostream>
#include <thread>

#ifdef __GLIBC__
#include <malloc.h>
#endif

#include "urlnet/adam.hpp"
#include "urlnet/error.hpp"
#include "urlnet/metrics.hpp"
#include "urlnet/ops.hpp"

namespace urlnet {

void TrainConfig::validate() const {
  if (batch_size < 1) throw UsageError("batch_size must be >= 1");
  if (epochs < 1) throw UsageError("epochs must be >= 1");
  if (!(learning_rate >= 0.0)) throw UsageError("learning_rate must be >= 0");
  if (eval_every < 0) throw UsageError("eval_every must be >= 0");
  if (!(positive_weight > 0.0)) throw UsageError("positive_weight must be > 0");
  if (!(grad_clip >= 0.0)) throw UsageError("grad_clip must be >= 0");
}

int default_threads() {
  if (const char* env = std::getenv("URLNET_THREADS")) {
    const int n = std::atoi(env);
    if (n > 0) return n;
  }
  return 1;
}

std::vector<Scalar> predict(const UrlNetModel& model, std::span<const EncodedUrl> data, int batch_size, int threads) {
  if (batch_size < 1) throw UsageError("batch_size must be >= 1");
  std::vector<Scalar> scores(data.size());
  if (data.empty()) return scores;
  const std::size_t nbatches = (data.size() + batch_size - 1) / batch_size;
  auto run = [&](std::size_t first_batch, std::size_t stride) {
    std::vector<const EncodedUrl*> batch;
    for (std::size_t b = first_batch; b < nbatches; b += stride) {
      const std::size_t lo = b * batch_size;
      const std::size_t hi = std::min(data.size(), lo + batch_size);
      batch.clear();
      for (std::size_t i = lo; i < hi; ++i) batch.push_back(&data[i]);
      const auto out = model.logits(batch);
      std::copy(out.begin(), out.end(), scores.begin() + static_cast<std::ptrdiff_t>(lo));
    }
  };
  const int n = std::clamp(threads > 0 ? threads : default_threads(), 1, static_cast<int>(nbatches));
  if (n == 1) {
    run(0, 1);
    return scores;
  }
  std::vector<std::thread> workers;
  std::vector<std::exception_ptr> errors(n);
  for (int t = 0; t < n; ++t) {
    workers.emplace_back([&, t] {
      try {
        run(static_cast<std::size_t>(t), static_cast<std::size_t>(n));
      } catch (...) {
        errors[t] = std::current_exception();
      }
    });
  }
  for (auto& w : workers) w.join();
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  return scores;
}

namespace {

EvalSnapshot evaluate(const UrlNetModel& model, std::span<const EncodedUrl> valid, std::int64_t step, int threads) {
  const auto scores = predict(model, valid, 64, threads);
  std::vector<int> labels;
  for (const auto& e : valid) labels.push_back(e.label.value_or(-1));
  std::vector<double> s(scores.begin(), scores.end());
  const auto curve = roc_curve(s, labels);
  EvalSnapshot snap;
  snap.step = step;
  snap.auc = auc(curve);
  for (double level : kReportFprLevels) snap.tpr_at_fpr[level] = tpr_at_fpr(curve, level);
  return snap;
}

bool has_both_classes(std::span<const EncodedUrl> data) {
  bool pos = false, neg = false;
  for (const auto& e : data) {
    if (!e.label) throw DataError("training example without a label");
    if (*e.label == 1) {
      pos = true;
    } else if (*e.label == -1) {
      neg = true;
    } else {
      throw DataError("label " + std::to_string(*e.label) + " is not +1/-1");
    }
  }
  return pos && neg;
}

void clip_gradients(const std::vector<Tensor*>& params, double max_norm) {
  double sq = 0.0;
  for (const Tensor* p : params) {
    if (!p->has_grad()) continue;
    for (Scalar g : p->grad()) sq += static_cast<double>(g) * g;
  }
  const double norm = std::sqrt(sq);
  if (norm <= max_norm || norm == 0.0) return;
  const auto scale = static_cast<Scalar>(max_norm / norm);
  for (Tensor* p : params) {
    if (!p->has_grad()) continue;
    for (Scalar& g : p->grad()) g *= scale;
  }
}

}  // namespace

TrainResult train(UrlNetModel& model, std::span<const EncodedUrl> train_set, std::span<const EncodedUrl> valid_set,
                  const TrainConfig& config) {
  config.validate();
#ifdef __GLIBC__
  // Per-step buffers are large; keep them on the heap rather than in fresh mmaps.
  static const bool tuned = [] {
    mallopt(M_MMAP_THRESHOLD, 256 << 20);
    mallopt(M_TRIM_THRESHOLD, 512 << 20);
    return true;
  }();
  (void)tuned;
#endif
  if (train_set.empty()) throw DataError("empty training set");
  if (!has_both_classes(train_set)) throw DataError("training set must contain both classes");
  const bool validate = !valid_set.empty() && has_both_classes(valid_set);

  TrainResult result;
  auto params = model.trainable();
  AdamOptions adam_opts;
  adam_opts.learning_rate = config.learning_rate;
  AdamState adam = make_adam_state(params, adam_opts);

  std::vector<std::size_t> order(train_set.size());
  std::iota(order.begin(), order.end(), 0);
  std::int64_t step = 0;
  const auto record_eval = [&] {
    if (!validate) return;
    auto snap = evaluate(model, valid_set, step, config.threads);
    if (!result.best_snapshot || snap.auc > result.best_snapshot->auc) {
      result.best_snapshot = snap;
      result.best_parameters = model.parameters();
      for (auto& [name, t] : *result.best_parameters) t.clear_grad();
    }
    result.history.snapshots.push_back(std::move(snap));
  };

  std::vector<const EncodedUrl*> batch;
  std::vector<int> targets;
  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    if (config.shuffle) {
      std::mt19937_64 shuffle_rng(config.seed * 1000003ULL + static_cast<std::uint64_t>(epoch));
      std::shuffle(order.begin(), order.end(), shuffle_rng);
    }
    for (std::size_t lo = 0; lo < order.size(); lo += config.batch_size) {
      const std::size_t hi = std::min(order.size(), lo + static_cast<std::size_t>(config.batch_size));
      batch.clear();
      targets.clear();
      for (std::size_t i = lo; i < hi; ++i) {
        batch.push_back(&train_set[order[i]]);
        targets.push_back(*train_set[order[i]].label == 1 ? 1 : 0);
      }
      // Dropout masks depend only on (seed, step).
      std::mt19937_64 rng(config.seed ^ (0x9e3779b97f4a7c15ULL * static_cast<std::uint64_t>(step + 1)));
      model.zero_grad();
      double loss_value = 0.0;
      try {
        Graph g;
        const auto out = model.forward(g, batch, true, rng);
        Var loss = ops::bce_with_logits(g, out.logits, targets, config.positive_weight);
        loss_value = g.value(loss).item();
        g.backward(loss);
      } catch (const NumericError& e) {
        throw NumericError("training diverged at step " + std::to_string(step + 1) + ": " + e.what());
      }
      if (!std::isfinite(loss_value)) {
        throw NumericError("non-finite loss at step " + std::to_string(step + 1));
      }
      if (config.grad_clip > 0.0) clip_gradients(params, config.grad_clip);
      adam_step(params, adam);
      ++step;
      result.history.losses.emplace_back(step, loss_value);
      if (config.eval_every > 0 && step % config.eval_every == 0) record_eval();
    }
    if (config.eval_every == 0) record_eval();
  }
  result.history.steps = step;
  model.zero_grad();
  return result;
}

void write_history_csv(std::ostream& os, const TrainHistory& history) {
  os << "step,loss,auc,tpr@1e-4,tpr@1e-3,tpr@1e-2,tpr@1e-1\n";
  os.precision(10);
  std::size_t snap = 0;
  for (const auto& [step, loss] : history.losses) {
    os << step << ',' << loss;
    if (snap < history.snapshots.size() && history.snapshots[snap].step == step) {
      const auto& s = history.snapshots[snap++];
      os << ',' << s.auc;
      for (double level : kReportFprLevels) os << ',' << s.tpr_at_fpr.at(level);
    } else {
      os << ",,,,,";
    }
    os << '\n';
  }
}

}  // namespace urlnet
