#pragma once

#include <cstdint>
#include <map>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "urlnet/graph.hpp"
#include "urlnet/tokenizer.hpp"
#include "json.hpp"

namespace urlnet {

enum class Variant { char_only, word_only, full };

std::string variant_name(Variant v);
// Accepts "char", "word", "full" and the *_only spellings.
Variant parse_variant(std::string_view name);

struct ModelConfig {
  Variant variant = Variant::full;
  bool use_special_char_words = false;
  bool use_char_level_words = false;
  int embedding_dim = 32;
  SequenceLengths lengths;
  std::vector<int> filter_widths{3, 4, 5, 6};
  int filters_per_width = 256;
  int branch_fc_dim = 512;
  std::vector<int> head_dims{512, 256, 128, 1};
  double dropout_rate = 0.5;

  bool has_char_branch() const { return variant != Variant::word_only; }
  bool has_word_branch() const { return variant != Variant::char_only; }
  // Width of the concatenated branch outputs fed to the head.
  int feature_dim() const { return branch_fc_dim * ((has_char_branch() ? 1 : 0) + (has_word_branch() ? 1 : 0)); }

  // Throws UsageError on inconsistent settings.
  void validate() const;

  nlohmann::json to_json() const;
  static ModelConfig from_json(const nlohmann::json& j);
  bool operator==(const ModelConfig&) const;
};

// Character branch, word branch (word embedding plus optional summed
// character-level word embedding), concatenation, and the fully connected head.
class UrlNetModel {
 public:
  UrlNetModel() = default;

  static UrlNetModel build(const ModelConfig& config, std::size_t char_vocab_size,
                           std::size_t word_vocab_size, std::uint64_t seed);
  // Reassembles a model from stored tensors; names and shapes must match the config.
  static UrlNetModel from_parameters(const ModelConfig& config, std::size_t char_vocab_size,
                                     std::size_t word_vocab_size, std::map<std::string, Tensor> params);
  static std::size_t expected_parameter_count(const ModelConfig& config, std::size_t char_vocab_size,
                                              std::size_t word_vocab_size);

  const ModelConfig& config() const { return config_; }
  std::size_t char_vocab_size() const { return char_vocab_size_; }
  std::size_t word_vocab_size() const { return word_vocab_size_; }

  std::map<std::string, Tensor>& parameters() { return params_; }
  const std::map<std::string, Tensor>& parameters() const { return params_; }
  bool has_parameter(const std::string& name) const { return params_.count(name) != 0; }
  Tensor& parameter(const std::string& name);
  const Tensor& parameter(const std::string& name) const;
  std::vector<Tensor*> trainable();
  std::size_t parameter_count() const;
  void zero_grad();

  struct Outputs {
    Var logits;    // [B]
    Var features;  // [B, feature_dim], concatenated branch outputs
  };

  // Records the forward pass of a batch on g. Gradients reach the model's
  // parameters when g has gradients enabled.
  Outputs forward(Graph& g, std::span<const EncodedUrl* const> batch, bool train, std::mt19937_64& rng);
  // Inference only; safe to call concurrently.
  Outputs forward(Graph& g, std::span<const EncodedUrl* const> batch) const;

  // Eval-mode logits, one graph per example, so scores never depend on batch grouping.
  std::vector<Scalar> logits(std::span<const EncodedUrl* const> batch) const;
  // Eval-mode concatenated branch vector; only defined for the full variant.
  std::vector<Scalar> feature_vector(const EncodedUrl& url) const;

  // Building blocks, exposed for tests.
  Var char_level_word_embedding(Graph& g, Var char_table, std::span<const EncodedUrl* const> batch) const;
  Var word_branch_input(Graph& g, Var word_table, Var char_table, std::span<const EncodedUrl* const> batch) const;

 private:
  Outputs forward_impl(Graph& g, std::span<const EncodedUrl* const> batch, bool train, std::mt19937_64* rng,
                       bool bind_mutable) const;
  Var branch(Graph& g, const std::string& prefix, Var embedded, bool train, std::mt19937_64* rng,
             bool bind_mutable) const;
  Var bind(Graph& g, const std::string& name, bool bind_mutable) const;
  void check_batch(std::span<const EncodedUrl* const> batch) const;

  ModelConfig config_;
  std::size_t char_vocab_size_ = 0;
  std::size_t word_vocab_size_ = 0;
  std::map<std::string, Tensor> params_;
};

}  // namespace urlnet
