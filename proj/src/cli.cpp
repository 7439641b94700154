#include "urlnet/cli.hpp"

#include <algorithm>
#include <filesystem>
#include <iomanip>
#include <ostream>
#include <sstream>

#include "CLI11.hpp"
#include "urlnet/error.hpp"
#include "urlnet/io.hpp"
#include "urlnet/synthetic.hpp"
#include "urlnet/workflows.hpp"

namespace urlnet {

namespace {

namespace fs = std::filesystem;

struct ModelFlags {
  std::string variant = "full";
  bool special_words = false;
  bool char_level_words = false;
  int embedding_dim = 32;
  int filters = 256;
  int branch_fc = 512;
  int l1 = 200;
  int l2 = 200;
  int l3 = 20;
  double dropout = 0.5;

  ModelConfig config() const {
    ModelConfig c;
    c.variant = parse_variant(variant);
    c.use_special_char_words = special_words;
    c.use_char_level_words = char_level_words;
    c.embedding_dim = embedding_dim;
    c.filters_per_width = filters;
    c.branch_fc_dim = branch_fc;
    c.head_dims = {512, 256, 128, 1};
    c.lengths = {l1, l2, l3};
    c.dropout_rate = dropout;
    c.validate();
    return c;
  }
};

void add_size_flags(CLI::App* app, ModelFlags& m) {
  app->add_option("--embedding-dim", m.embedding_dim, "Embedding dimension k")->capture_default_str();
  app->add_option("--filters", m.filters, "Convolution filters per width")->capture_default_str();
  app->add_option("--branch-fc", m.branch_fc, "Width of each branch's fully connected layer")->capture_default_str();
  app->add_option("--l1", m.l1, "Characters per URL")->capture_default_str();
  app->add_option("--l2", m.l2, "Words per URL")->capture_default_str();
  app->add_option("--l3", m.l3, "Characters per word")->capture_default_str();
  app->add_option("--dropout", m.dropout, "Dropout rate")->capture_default_str();
}

void add_train_flags(CLI::App* app, TrainConfig& t, VocabOptions& v) {
  app->add_option("--epochs", t.epochs, "Training epochs")->capture_default_str();
  app->add_option("--batch-size", t.batch_size, "Minibatch size")->capture_default_str();
  app->add_option("--lr", t.learning_rate, "Adam learning rate")->capture_default_str();
  app->add_option("--seed", t.seed, "Random seed")->capture_default_str();
  app->add_option("--positive-weight", t.positive_weight, "Loss weight of malicious examples")->capture_default_str();
  app->add_option("--grad-clip", t.grad_clip, "Global gradient norm clip (0 = off)")->capture_default_str();
  app->add_option("--threads", t.threads, "Evaluation threads (default URLNET_THREADS or 1)");
  app->add_option("--min-char-count", v.min_char_count, "Minimum character frequency")->capture_default_str();
  app->add_option("--rare-threshold", v.rare_threshold, "Words seen at most this often map to <UNK>")
      ->capture_default_str();
}

std::string dump_json(const nlohmann::json& j) { return j.dump(2) + "\n"; }

std::string roc_csv(const RocCurve& curve) {
  std::ostringstream os;
  write_roc_csv(os, curve);
  return os.str();
}

std::string format_scalar(Scalar v) {
  std::ostringstream os;
  os << std::setprecision(std::numeric_limits<Scalar>::max_digits10) << v;
  return os.str();
}

void ensure_directory(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw DataError("cannot create directory " + dir.string() + ": " + ec.message());
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Malicious URL detection with character and word CNNs", "urlnet"};
  app.require_subcommand(1);

  // vocab build
  auto* vocab = app.add_subcommand("vocab", "Vocabulary tools");
  vocab->require_subcommand(1);
  auto* vocab_build = vocab->add_subcommand("build", "Build character and word vocabularies from a dataset");
  std::string vb_input, vb_out;
  VocabOptions vb_opts;
  bool vb_special = false;
  vocab_build->add_option("--input", vb_input, "Labelled TSV dataset")->required();
  vocab_build->add_option("--out", vb_out, "Output directory")->required();
  vocab_build->add_option("--min-char-count", vb_opts.min_char_count)->capture_default_str();
  vocab_build->add_option("--rare-threshold", vb_opts.rare_threshold)->capture_default_str();
  vocab_build->add_flag("--special-words", vb_special, "Treat special characters as words");

  // train
  auto* train_cmd = app.add_subcommand("train", "Train a URLNet model");
  ModelFlags tr_model;
  TrainConfig tr_cfg;
  VocabOptions tr_vocab;
  std::string tr_train, tr_valid, tr_out, tr_history, tr_vocab_dir;
  train_cmd->add_option("--variant", tr_model.variant, "char, word or full")
      ->check(CLI::IsMember({"char", "word", "full", "char_only", "word_only"}))
      ->capture_default_str();
  train_cmd->add_flag("--special-words", tr_model.special_words, "Treat special characters as words");
  train_cmd->add_flag("--char-level-words", tr_model.char_level_words, "Add character-level word embeddings");
  train_cmd->add_option("--train", tr_train, "Training TSV")->required();
  train_cmd->add_option("--valid", tr_valid, "Validation TSV (best-AUC checkpoint is kept)");
  train_cmd->add_option("--out", tr_out, "Model archive to write")->required();
  train_cmd->add_option("--history", tr_history, "Write the loss/metric history CSV here");
  train_cmd->add_option("--vocab", tr_vocab_dir, "Directory with prebuilt chars.vocab / words.vocab");
  train_cmd->add_option("--eval-every", tr_cfg.eval_every, "Validate every N steps (0 = per epoch)");
  add_size_flags(train_cmd, tr_model);
  add_train_flags(train_cmd, tr_cfg, tr_vocab);

  // eval
  auto* eval_cmd = app.add_subcommand("eval", "Evaluate a model on a labelled dataset");
  std::string ev_model, ev_test, ev_report, ev_roc;
  int ev_threads = 0;
  eval_cmd->add_option("--model", ev_model)->required();
  eval_cmd->add_option("--test", ev_test)->required();
  eval_cmd->add_option("--report", ev_report, "Metrics JSON")->required();
  eval_cmd->add_option("--roc", ev_roc, "ROC curve CSV");
  eval_cmd->add_option("--threads", ev_threads);

  // ablate
  auto* ablate_cmd = app.add_subcommand("ablate", "Train and evaluate every ablation variant");
  ModelFlags ab_model;
  TrainConfig ab_cfg;
  VocabOptions ab_vocab;
  std::string ab_train, ab_test, ab_out;
  ablate_cmd->add_option("--train", ab_train)->required();
  ablate_cmd->add_option("--test", ab_test)->required();
  ablate_cmd->add_option("--out", ab_out, "Output directory")->required();
  add_size_flags(ablate_cmd, ab_model);
  add_train_flags(ablate_cmd, ab_cfg, ab_vocab);

  // baseline
  auto* base_cmd = app.add_subcommand("baseline", "Train and evaluate an L1-regularized linear baseline");
  std::string bl_pipeline, bl_train, bl_test, bl_report, bl_roc, bl_export_train, bl_export_test;
  LinearTrainOptions bl_opts;
  base_cmd->add_option("--pipeline", bl_pipeline, "bow, uct, psb, trigram or combined")
      ->required()
      ->check(CLI::IsMember({"bow", "uct", "psb", "trigram", "combined"}));
  base_cmd->add_option("--train", bl_train)->required();
  base_cmd->add_option("--test", bl_test)->required();
  base_cmd->add_option("--report", bl_report)->required();
  base_cmd->add_option("--roc", bl_roc);
  base_cmd->add_option("--lambda", bl_opts.l1_lambda, "L1 penalty")->capture_default_str();
  base_cmd->add_option("--epochs", bl_opts.epochs, "Proximal gradient iterations")->capture_default_str();
  base_cmd->add_option("--lr", bl_opts.learning_rate)->capture_default_str();
  base_cmd->add_option("--export-train", bl_export_train, "Write sparse training features");
  base_cmd->add_option("--export-test", bl_export_test, "Write sparse test features");

  // score
  auto* score_cmd = app.add_subcommand("score", "Score URLs with a trained model");
  std::string sc_model, sc_urls, sc_out;
  int sc_threads = 0;
  score_cmd->add_option("--model", sc_model)->required();
  score_cmd->add_option("--urls", sc_urls, "One URL per line")->required();
  score_cmd->add_option("--out", sc_out, "TSV url, logit, label")->required();
  score_cmd->add_option("--threads", sc_threads);

  // embed
  auto* embed_cmd = app.add_subcommand("embed", "Export concatenated branch feature vectors");
  std::string em_model, em_urls, em_out;
  embed_cmd->add_option("--model", em_model)->required();
  embed_cmd->add_option("--urls", em_urls, "One URL per line")->required();
  embed_cmd->add_option("--out", em_out, "CSV, one row per URL")->required();

  // prepare
  auto* prep_cmd = app.add_subcommand("prepare", "Deduplicate, cap hostnames and split by time");
  std::string pr_input, pr_train, pr_test;
  PrepareOptions pr_opts;
  bool pr_no_dedup = false, pr_no_time = false;
  std::size_t pr_sample = 0;
  prep_cmd->add_option("--input", pr_input)->required();
  prep_cmd->add_option("--train-out", pr_train)->required();
  prep_cmd->add_option("--test-out", pr_test)->required();
  prep_cmd->add_flag("--no-dedup", pr_no_dedup);
  prep_cmd->add_flag("--no-time-order", pr_no_time);
  prep_cmd->add_option("--domain-cap", pr_opts.domain_cap_fraction, "Per-hostname cap fraction (0 = off)")
      ->capture_default_str();
  prep_cmd->add_option("--split", pr_opts.split_fraction, "Training fraction")->capture_default_str();
  prep_cmd->add_option("--sample", pr_sample, "Randomly keep N training records");
  prep_cmd->add_option("--seed", pr_opts.seed)->capture_default_str();

  // synth
  auto* synth_cmd = app.add_subcommand("synth", "Generate a synthetic labelled corpus");
  SyntheticOptions sy_opts;
  std::string sy_out;
  synth_cmd->add_option("--out", sy_out)->required();
  synth_cmd->add_option("--count", sy_opts.count)->capture_default_str();
  synth_cmd->add_option("--malicious-fraction", sy_opts.malicious_fraction)->capture_default_str();
  synth_cmd->add_option("--seed", sy_opts.seed)->capture_default_str();
  synth_cmd->add_flag("--marker-only", sy_opts.marker_only, "Malicious URLs carry only drifting marker words");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err) == 0 ? 0 : static_cast<int>(ExitCode::usage);
  }

  CLI::App* active = &app;
  try {
    if (vocab_build->parsed()) {
      active = vocab_build;
      const auto ds = load_dataset(vb_input);
      const auto urls = ds.urls();
      const auto cv = CharVocab::build(urls, vb_opts.min_char_count);
      const auto wv = WordVocab::build(urls, vb_special, vb_opts.rare_threshold);
      ensure_directory(vb_out);
      write_file_atomic(fs::path(vb_out) / "chars.vocab", cv.to_string());
      write_file_atomic(fs::path(vb_out) / "words.vocab", wv.to_string());
      out << "chars: " << cv.size() << ", words: " << wv.size() << " (" << wv.folded_types()
          << " rare types folded)\n";
    } else if (train_cmd->parsed()) {
      active = train_cmd;
      const auto model_config = tr_model.config();
      std::optional<CharVocab> cv;
      std::optional<WordVocab> wv;
      if (!tr_vocab_dir.empty()) {
        cv = CharVocab::from_string(read_file(fs::path(tr_vocab_dir) / "chars.vocab"));
        wv = WordVocab::from_string(read_file(fs::path(tr_vocab_dir) / "words.vocab"));
      }
      const auto train_ds = load_dataset(tr_train);
      const Dataset valid_ds = tr_valid.empty() ? Dataset{} : load_dataset(tr_valid);
      const auto outcome = train_urlnet(train_ds, valid_ds, model_config, tr_cfg, tr_vocab, cv, wv);
      save_model(outcome.archive, tr_out);
      if (!tr_history.empty()) {
        std::ostringstream os;
        write_history_csv(os, outcome.result.history);
        write_file_atomic(tr_history, os.str());
      }
      out << "trained " << variant_name(model_config.variant) << " for " << outcome.result.history.steps
          << " steps, final loss " << outcome.result.history.losses.back().second;
      if (outcome.result.best_snapshot) out << ", best validation AUC " << outcome.result.best_snapshot->auc;
      out << "\n";
    } else if (eval_cmd->parsed()) {
      active = eval_cmd;
      const auto archive = load_model(ev_model);
      const auto eval = evaluate_model(archive, load_dataset(ev_test), ev_threads);
      if (!ev_roc.empty()) write_file_atomic(ev_roc, roc_csv(eval.curve));
      write_file_atomic(ev_report, dump_json(eval.report));
      out << "auc " << eval.report["auc"].get<double>() << "\n";
    } else if (ablate_cmd->parsed()) {
      active = ablate_cmd;
      const auto base = ab_model.config();
      const auto rows = run_ablation(load_dataset(ab_train), load_dataset(ab_test), base, ab_cfg, ab_vocab);
      nlohmann::json report{{"seed", ab_cfg.seed}, {"epochs", ab_cfg.epochs}, {"model", base.to_json()},
                            {"rows", rows}};
      report["model"].erase("variant");
      report["model"].erase("use_special_char_words");
      report["model"].erase("use_char_level_words");
      ensure_directory(ab_out);
      std::ostringstream csv;
      csv << "name,auc,tpr@1e-4,tpr@1e-3,tpr@1e-2,tpr@1e-1\n" << std::setprecision(6);
      for (const auto& r : rows) {
        csv << r["name"].get<std::string>() << ',' << r["auc"].get<double>();
        for (const char* k : {"tpr@1e-4", "tpr@1e-3", "tpr@1e-2", "tpr@1e-1"}) csv << ',' << r[k].get<double>();
        csv << '\n';
      }
      write_file_atomic(fs::path(ab_out) / "ablation.json", dump_json(report));
      write_file_atomic(fs::path(ab_out) / "ablation.csv", csv.str());
      out << csv.str();
    } else if (base_cmd->parsed()) {
      active = base_cmd;
      const auto train_ds = load_dataset(bl_train);
      const auto test_ds = load_dataset(bl_test);
      const auto outcome = run_baseline(parse_pipeline(bl_pipeline), train_ds, test_ds, bl_opts);
      auto write_sparse = [&](const std::string& path, const Dataset& ds) {
        std::ostringstream os;
        os << std::setprecision(17);
        for (const auto& r : ds.records) write_sparse_line(os, r.label, outcome.extractor.transform(r.url));
        write_file_atomic(path, os.str());
      };
      if (!bl_export_train.empty()) write_sparse(bl_export_train, train_ds);
      if (!bl_export_test.empty()) write_sparse(bl_export_test, test_ds);
      if (!bl_roc.empty()) write_file_atomic(bl_roc, roc_csv(outcome.evaluation.curve));
      write_file_atomic(bl_report, dump_json(outcome.evaluation.report));
      out << bl_pipeline << " auc " << outcome.evaluation.report["auc"].get<double>() << "\n";
    } else if (score_cmd->parsed()) {
      active = score_cmd;
      const auto archive = load_model(sc_model);
      const auto urls = load_url_list(sc_urls);
      const auto scores = score_urls(archive, urls, sc_threads);
      std::string tsv;
      for (std::size_t i = 0; i < urls.size(); ++i) {
        tsv += urls[i] + '\t' + format_scalar(scores[i]) + '\t' + (scores[i] > 0 ? "+1" : "-1") + '\n';
      }
      write_file_atomic(sc_out, tsv);
    } else if (embed_cmd->parsed()) {
      active = embed_cmd;
      const auto archive = load_model(em_model);
      const auto urls = load_url_list(em_urls);
      std::string csv;
      for (const auto& u : urls) {
        const auto enc = encode_url(u, archive.char_vocab, archive.word_vocab, archive.model.config().lengths);
        const auto v = archive.model.feature_vector(enc);
        for (std::size_t i = 0; i < v.size(); ++i) {
          if (i > 0) csv += ',';
          csv += format_scalar(v[i]);
        }
        csv += '\n';
      }
      write_file_atomic(em_out, csv);
    } else if (prep_cmd->parsed()) {
      active = prep_cmd;
      pr_opts.dedup = !pr_no_dedup;
      pr_opts.time_order = !pr_no_time;
      if (pr_sample > 0) pr_opts.sample_train = pr_sample;
      if (!(pr_opts.split_fraction > 0.0 && pr_opts.split_fraction < 1.0)) {
        throw UsageError("--split must be in (0, 1)");
      }
      const auto [train_ds, test_ds] = prepare_dataset(load_dataset(pr_input), pr_opts);
      std::ostringstream tr, te;
      write_dataset(tr, train_ds);
      write_dataset(te, test_ds);
      write_file_atomic(pr_train, tr.str());
      write_file_atomic(pr_test, te.str());
      out << "train " << train_ds.size() << ", test " << test_ds.size() << "\n";
    } else if (synth_cmd->parsed()) {
      active = synth_cmd;
      std::ostringstream os;
      write_dataset(os, generate_synthetic(sy_opts));
      write_file_atomic(sy_out, os.str());
    }
  } catch (const UsageError& e) {
    err << "error: " << e.what() << "\n\n" << active->help();
    return static_cast<int>(e.exit_code());
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return static_cast<int>(e.exit_code());
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return static_cast<int>(ExitCode::data);
  }
  return 0;
}

}  // namespace urlnet
