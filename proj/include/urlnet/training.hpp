#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <vector>

#include "urlnet/model.hpp"

namespace urlnet {

struct TrainConfig {
  int batch_size = 128;
  int epochs = 5;
  double learning_rate = 1e-3;
  std::uint64_t seed = 0;
  bool shuffle = true;
  // Validation every this many steps; 0 means once per epoch.
  int eval_every = 0;
  // Loss weight of positive examples; 1 leaves the loss unweighted.
  double positive_weight = 1.0;
  // Global gradient-norm clip; 0 disables.
  double grad_clip = 0.0;
  // Evaluation parallelism (0 = URLNET_THREADS or 1).
  int threads = 0;

  void validate() const;
};

struct EvalSnapshot {
  std::int64_t step = 0;
  double auc = 0.0;
  std::map<double, double> tpr_at_fpr;  // level -> tpr
};

struct TrainHistory {
  std::vector<std::pair<std::int64_t, double>> losses;  // (step, loss), steps counted from 1
  std::vector<EvalSnapshot> snapshots;
  std::int64_t steps = 0;
};

struct TrainResult {
  TrainHistory history;
  // Parameters at the best validation AUC, when validation ran.
  std::optional<std::map<std::string, Tensor>> best_parameters;
  std::optional<EvalSnapshot> best_snapshot;
};

// Minibatch Adam on mean sigmoid cross-entropy, labels {-1,+1} -> {0,1}.
// Runs epochs * ceil(N / batch_size) steps; shuffling is reseeded per epoch.
// Throws DataError for a single-class training set and NumericError (naming
// the step) when the loss stops being finite.
TrainResult train(UrlNetModel& model, std::span<const EncodedUrl> train_set, std::span<const EncodedUrl> valid_set,
                  const TrainConfig& config);

// One eval-mode logit per URL, in input order.
std::vector<Scalar> predict(const UrlNetModel& model, std::span<const EncodedUrl> data, int batch_size = 64,
                            int threads = 0);

// Thread count from URLNET_THREADS, defaulting to 1.
int default_threads();

// CSV "step,loss,auc,tpr@1e-4,tpr@1e-3,tpr@1e-2,tpr@1e-1"; evaluation columns
// are empty on steps without a snapshot.
void write_history_csv(std::ostream& os, const TrainHistory& history);

}  // namespace urlnet
