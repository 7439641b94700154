#include "urlnet/workflows.hpp"

#include "urlnet/error.hpp"

namespace urlnet {

namespace {

Evaluation make_evaluation(std::span<const double> scores, std::span<const int> labels) {
  Evaluation e;
  e.curve = roc_curve(scores, labels);
  e.report = metrics_report(e.curve);
  return e;
}

}  // namespace

TrainOutcome train_urlnet(const Dataset& train, const Dataset& valid, const ModelConfig& model_config,
                          const TrainConfig& train_config, const VocabOptions& vocab_options,
                          const std::optional<CharVocab>& char_vocab, const std::optional<WordVocab>& word_vocab) {
  model_config.validate();
  train_config.validate();
  if (train.empty()) throw DataError("empty training set");
  const auto urls = train.urls();
  CharVocab cv = char_vocab ? *char_vocab : CharVocab::build(urls, vocab_options.min_char_count);
  WordVocab wv = word_vocab ? *word_vocab
                            : WordVocab::build(urls, model_config.use_special_char_words, vocab_options.rare_threshold);
  if (wv.special_as_words() != model_config.use_special_char_words) {
    throw UsageError("word vocabulary was built with special_as_words=" + std::to_string(wv.special_as_words()) +
                     " but the model uses " + std::to_string(model_config.use_special_char_words));
  }
  auto model = UrlNetModel::build(model_config, cv.size(), wv.size(), train_config.seed);
  const auto train_enc = encode_dataset(train, cv, wv, model_config.lengths);
  const auto valid_enc = encode_dataset(valid, cv, wv, model_config.lengths);
  auto result = urlnet::train(model, train_enc, valid_enc, train_config);
  if (result.best_parameters) {
    for (auto& [name, t] : model.parameters()) {
      auto& best = result.best_parameters->at(name);
      std::copy(best.data().begin(), best.data().end(), t.data().begin());
    }
  }
  nlohmann::json meta{{"seed", static_cast<std::uint64_t>(train_config.seed)},
                      {"steps", static_cast<std::int64_t>(result.history.steps)},
                      {"epochs", train_config.epochs},
                      {"batch_size", train_config.batch_size},
                      {"learning_rate", train_config.learning_rate},
                      {"train_records", static_cast<std::uint64_t>(train.size())}};
  if (result.best_snapshot) {
    meta["best_step"] = result.best_snapshot->step;
    meta["best_valid_auc"] = result.best_snapshot->auc;
  }
  return {ModelArchive{std::move(model), std::move(cv), std::move(wv), std::move(meta)}, std::move(result)};
}

std::vector<Scalar> score_urls(const ModelArchive& archive, const std::vector<std::string>& urls, int threads) {
  std::vector<EncodedUrl> enc;
  enc.reserve(urls.size());
  for (const auto& u : urls) {
    enc.push_back(encode_url(u, archive.char_vocab, archive.word_vocab, archive.model.config().lengths));
  }
  return predict(archive.model, enc, 64, threads);
}

Evaluation evaluate_model(const ModelArchive& archive, const Dataset& test, int threads) {
  const auto scores = score_urls(archive, test.urls(), threads);
  const std::vector<double> s(scores.begin(), scores.end());
  return make_evaluation(s, test.labels());
}

std::vector<AblationRow> ablation_grid(const ModelConfig& base) {
  auto make = [&](Variant v, bool special, bool char_level) {
    ModelConfig c = base;
    c.variant = v;
    c.use_special_char_words = special;
    c.use_char_level_words = char_level;
    return c;
  };
  return {{"char", make(Variant::char_only, false, false)},
          {"word", make(Variant::word_only, false, false)},
          {"word+special", make(Variant::word_only, true, false)},
          {"word+special+charlevel", make(Variant::word_only, true, true)},
          {"full", make(Variant::full, false, false)},
          {"full+special", make(Variant::full, true, false)},
          {"full+special+charlevel", make(Variant::full, true, true)}};
}

nlohmann::json run_ablation(const Dataset& train, const Dataset& test, const ModelConfig& base,
                            const TrainConfig& train_config, const VocabOptions& vocab_options) {
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& row : ablation_grid(base)) {
    const auto outcome = train_urlnet(train, Dataset{}, row.config, train_config, vocab_options);
    const auto eval = evaluate_model(outcome.archive, test, train_config.threads);
    nlohmann::json r = eval.report;
    r["name"] = row.name;
    r["variant"] = variant_name(row.config.variant);
    r["special_words"] = row.config.use_special_char_words;
    r["char_level_words"] = row.config.use_char_level_words;
    r["steps"] = outcome.result.history.steps;
    r["final_loss"] = outcome.result.history.losses.back().second;
    rows.push_back(std::move(r));
  }
  return rows;
}

BaselineOutcome run_baseline(Pipeline pipeline, const Dataset& train, const Dataset& test,
                             const LinearTrainOptions& options) {
  if (train.empty() || test.empty()) throw DataError("baseline needs non-empty train and test sets");
  FeatureExtractor fx(pipeline);
  const auto train_urls = train.urls();
  fx.fit(train_urls);
  std::vector<SparseFeatureVector> xs;
  xs.reserve(train.size());
  for (const auto& u : train_urls) xs.push_back(fx.transform(u));
  auto model = train_linear_l1(xs, train.labels(), options);
  std::vector<double> scores;
  scores.reserve(test.size());
  for (const auto& r : test.records) scores.push_back(predict_linear(model, fx.transform(r.url)));
  auto eval = make_evaluation(scores, test.labels());
  eval.report["pipeline"] = pipeline_name(pipeline);
  eval.report["dimension"] = fx.dimension();
  eval.report["nonzero_weights"] = model.nonzero_weights();
  eval.report["l1_lambda"] = options.l1_lambda;
  return {std::move(fx), std::move(model), std::move(eval)};
}

}  // namespace urlnet
