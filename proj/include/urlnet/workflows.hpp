#pragma once

#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "urlnet/archive.hpp"
#include "urlnet/baseline.hpp"
#include "urlnet/dataset.hpp"
#include "urlnet/linear.hpp"
#include "urlnet/metrics.hpp"
#include "urlnet/training.hpp"

namespace urlnet {

struct VocabOptions {
  int min_char_count = 1;
  int rare_threshold = 1;
};

struct TrainOutcome {
  ModelArchive archive;
  TrainResult result;
};

// Builds vocabularies from train (unless given), trains, and packages the
// model. With a validation set the best-AUC checkpoint is kept.
TrainOutcome train_urlnet(const Dataset& train, const Dataset& valid, const ModelConfig& model_config,
                          const TrainConfig& train_config, const VocabOptions& vocab_options,
                          const std::optional<CharVocab>& char_vocab = std::nullopt,
                          const std::optional<WordVocab>& word_vocab = std::nullopt);

std::vector<Scalar> score_urls(const ModelArchive& archive, const std::vector<std::string>& urls, int threads = 0);

// Metrics report (see metrics_report) plus the curve.
struct Evaluation {
  RocCurve curve;
  nlohmann::json report;
};

Evaluation evaluate_model(const ModelArchive& archive, const Dataset& test, int threads = 0);

struct AblationRow {
  std::string name;
  ModelConfig config;
};

// The URLNet rows of the ablation table: char; word, +special, +char-level;
// full, +special, +char-level. Sizes and dropout come from base.
std::vector<AblationRow> ablation_grid(const ModelConfig& base);

// One report row per grid entry: name, variant, flags and the test metrics.
nlohmann::json run_ablation(const Dataset& train, const Dataset& test, const ModelConfig& base,
                            const TrainConfig& train_config, const VocabOptions& vocab_options);

struct BaselineOutcome {
  FeatureExtractor extractor;
  LinearModel model;
  Evaluation evaluation;
};

BaselineOutcome run_baseline(Pipeline pipeline, const Dataset& train, const Dataset& test,
                             const LinearTrainOptions& options);

}  // namespace urlnet
