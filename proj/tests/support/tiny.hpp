#pragma once

#include <random>
#include <string>
#include <vector>

#include "gradcheck.hpp"
#include "urlnet/model.hpp"
#include "urlnet/ops.hpp"
#include "urlnet/tokenizer.hpp"

namespace urlnet::testing {

// Small enough for exhaustive finite differences over every parameter.
inline ModelConfig tiny_config(Variant v, bool special = false, bool char_level = false) {
  ModelConfig c;
  c.variant = v;
  c.use_special_char_words = special;
  c.use_char_level_words = char_level;
  c.embedding_dim = 3;
  c.lengths = {10, 5, 4};
  c.filter_widths = {2, 3};
  c.filters_per_width = 3;
  c.branch_fc_dim = 4;
  c.head_dims = {4, 1};
  c.dropout_rate = 0.5;
  return c;
}

inline std::string random_url(std::mt19937_64& rng, std::size_t max_len = 24) {
  static const std::string alphabet = "abcdefxyz0123-_./?=&:";
  std::uniform_int_distribution<std::size_t> len(1, max_len), pick(0, alphabet.size() - 1);
  std::string s = "http://";
  const std::size_t n = len(rng);
  for (std::size_t i = 0; i < n; ++i) s.push_back(alphabet[pick(rng)]);
  return s;
}

struct TinyWorld {
  std::vector<std::string> corpus;
  CharVocab chars;
  WordVocab words;
};

inline TinyWorld tiny_world(bool special) {
  TinyWorld w;
  w.corpus = {"http://paypal.com/login", "http://abc.net/x/y.exe", "http://bank-secure.xyz/verify?id=3",
              "http://example.org/a_b/c", "http://10.0.0.1/z.php"};
  w.chars = CharVocab::build(w.corpus, 1);
  w.words = WordVocab::build(w.corpus, special, 0);
  return w;
}

// Mean BCE over a labelled batch, optionally with a fixed dropout mask.
inline Var model_loss(Graph& g, UrlNetModel& model, const std::vector<EncodedUrl>& batch, bool dropout) {
  std::vector<const EncodedUrl*> ptrs;
  std::vector<int> labels;
  for (const auto& e : batch) {
    ptrs.push_back(&e);
    labels.push_back(e.label.value_or(-1) > 0 ? 1 : 0);
  }
  std::mt19937_64 rng(99);
  const auto out = model.forward(g, ptrs, dropout, rng);
  return ops::bce_with_logits(g, out.logits, labels);
}

}  // namespace urlnet::testing
