#include "urlnet/model.hpp"

#include <algorithm>
#include <cmath>

#include "urlnet/error.hpp"
#include "urlnet/ops.hpp"

namespace urlnet {

using ops::Activation;

std::string variant_name(Variant v) {
  switch (v) {
    case Variant::char_only: return "char";
    case Variant::word_only: return "word";
    case Variant::full: return "full";
  }
  return "full";
}

Variant parse_variant(std::string_view name) {
  if (name == "char" || name == "char_only") return Variant::char_only;
  if (name == "word" || name == "word_only") return Variant::word_only;
  if (name == "full") return Variant::full;
  throw UsageError("unknown model variant '" + std::string(name) + "' (expected char, word or full)");
}

void ModelConfig::validate() const {
  auto fail = [](const std::string& msg) { throw UsageError("model config: " + msg); };
  if (embedding_dim < 1) fail("embedding_dim must be >= 1");
  if (lengths.chars < 1 || lengths.words < 1 || lengths.word_chars < 1) fail("sequence lengths must be >= 1");
  if (filter_widths.empty()) fail("at least one filter width is required");
  const int limit = std::min(lengths.chars, lengths.words);
  for (int h : filter_widths) {
    if (h < 1 || h > limit) fail("filter width " + std::to_string(h) + " outside [1, " + std::to_string(limit) + "]");
  }
  if (filters_per_width < 1) fail("filters_per_width must be >= 1");
  if (branch_fc_dim < 1) fail("branch_fc_dim must be > 0");
  if (head_dims.empty() || head_dims.back() != 1) fail("head_dims must end in 1");
  for (int d : head_dims) {
    if (d < 1) fail("head_dims entries must be >= 1");
  }
  if (!(dropout_rate >= 0.0 && dropout_rate < 1.0)) fail("dropout_rate must be in [0, 1)");
  if (variant == Variant::char_only && (use_special_char_words || use_char_level_words)) {
    fail("word-branch options are not available for the char variant");
  }
}

nlohmann::json ModelConfig::to_json() const {
  return nlohmann::json{{"variant", variant_name(variant)},
                        {"use_special_char_words", use_special_char_words},
                        {"use_char_level_words", use_char_level_words},
                        {"embedding_dim", embedding_dim},
                        {"l1", lengths.chars},
                        {"l2", lengths.words},
                        {"l3", lengths.word_chars},
                        {"filter_widths", filter_widths},
                        {"filters_per_width", filters_per_width},
                        {"branch_fc_dim", branch_fc_dim},
                        {"head_dims", head_dims},
                        {"dropout_rate", dropout_rate}};
}

ModelConfig ModelConfig::from_json(const nlohmann::json& j) {
  try {
    ModelConfig c;
    c.variant = parse_variant(j.at("variant").get<std::string>());
    c.use_special_char_words = j.at("use_special_char_words").get<bool>();
    c.use_char_level_words = j.at("use_char_level_words").get<bool>();
    c.embedding_dim = j.at("embedding_dim").get<int>();
    c.lengths.chars = j.at("l1").get<int>();
    c.lengths.words = j.at("l2").get<int>();
    c.lengths.word_chars = j.at("l3").get<int>();
    c.filter_widths = j.at("filter_widths").get<std::vector<int>>();
    c.filters_per_width = j.at("filters_per_width").get<int>();
    c.branch_fc_dim = j.at("branch_fc_dim").get<int>();
    c.head_dims = j.at("head_dims").get<std::vector<int>>();
    c.dropout_rate = j.at("dropout_rate").get<double>();
    return c;
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("model config: ") + e.what());
  }
}

bool ModelConfig::operator==(const ModelConfig& o) const { return to_json() == o.to_json(); }

namespace {

// Names and shapes of every parameter, in initialization order.
struct ParamSpec {
  std::string name;
  Shape shape;
  enum class Init { embedding, embedding_pinned_pad, weight, weight_linear, zero } init;
  std::int64_t fan_in = 0;
};

std::vector<ParamSpec> parameter_specs(const ModelConfig& c, std::size_t mc, std::size_t mw) {
  std::vector<ParamSpec> specs;
  const std::int64_t k = c.embedding_dim;
  const std::int64_t nf = c.filters_per_width;
  const std::int64_t pooled = nf * static_cast<std::int64_t>(c.filter_widths.size());
  auto branch = [&](const std::string& prefix) {
    for (int h : c.filter_widths) {
      const std::string base = prefix + ".conv" + std::to_string(h);
      specs.push_back({base + ".filters", {h, k, nf}, ParamSpec::Init::weight, h * k});
      specs.push_back({base + ".bias", {nf}, ParamSpec::Init::zero});
    }
    specs.push_back({prefix + ".fc.weight", {c.branch_fc_dim, pooled}, ParamSpec::Init::weight, pooled});
    specs.push_back({prefix + ".fc.bias", {c.branch_fc_dim}, ParamSpec::Init::zero});
  };
  if (c.has_char_branch()) {
    specs.push_back({"char.embedding", {static_cast<std::int64_t>(mc), k}, ParamSpec::Init::embedding});
    branch("char");
  }
  if (c.has_word_branch()) {
    specs.push_back({"word.embedding", {static_cast<std::int64_t>(mw), k}, ParamSpec::Init::embedding});
    if (c.use_char_level_words) {
      specs.push_back(
          {"word.char_embedding", {static_cast<std::int64_t>(mc), k}, ParamSpec::Init::embedding_pinned_pad});
    }
    branch("word");
  }
  std::int64_t in = c.feature_dim();
  for (std::size_t i = 0; i < c.head_dims.size(); ++i) {
    const std::int64_t out = c.head_dims[i];
    const bool last = i + 1 == c.head_dims.size();
    const std::string base = "head." + std::to_string(i);
    specs.push_back({base + ".weight", {out, in}, last ? ParamSpec::Init::weight_linear : ParamSpec::Init::weight, in});
    specs.push_back({base + ".bias", {out}, ParamSpec::Init::zero});
    in = out;
  }
  return specs;
}

std::string head_name(std::size_t i, const char* what) { return "head." + std::to_string(i) + "." + what; }

}  // namespace

UrlNetModel UrlNetModel::build(const ModelConfig& config, std::size_t char_vocab_size,
                               std::size_t word_vocab_size, std::uint64_t seed) {
  config.validate();
  if (config.has_char_branch() || config.use_char_level_words) {
    if (char_vocab_size < 2) throw UsageError("character vocabulary must hold at least <PAD> and <UNK>");
  }
  if (config.has_word_branch() && word_vocab_size < 2) {
    throw UsageError("word vocabulary must hold at least <PAD> and <UNK>");
  }
  UrlNetModel m;
  m.config_ = config;
  m.char_vocab_size_ = char_vocab_size;
  m.word_vocab_size_ = word_vocab_size;
  std::mt19937_64 rng(seed);
  for (const auto& spec : parameter_specs(config, char_vocab_size, word_vocab_size)) {
    Tensor t(spec.shape);
    double limit = 0.0;
    switch (spec.init) {
      case ParamSpec::Init::embedding:
      case ParamSpec::Init::embedding_pinned_pad: limit = 0.05; break;
      case ParamSpec::Init::weight: limit = std::sqrt(6.0 / static_cast<double>(spec.fan_in)); break;
      case ParamSpec::Init::weight_linear: limit = 1.0 / std::sqrt(static_cast<double>(spec.fan_in)); break;
      case ParamSpec::Init::zero: break;
    }
    if (limit > 0.0) {
      std::uniform_real_distribution<double> uni(-limit, limit);
      for (auto& v : t.data()) v = static_cast<Scalar>(uni(rng));
    }
    if (spec.init == ParamSpec::Init::embedding_pinned_pad) {
      std::fill_n(t.ptr() + kPadId * spec.shape[1], spec.shape[1], Scalar(0));
    }
    t.set_requires_grad(true);
    m.params_.emplace(spec.name, std::move(t));
  }
  return m;
}

UrlNetModel UrlNetModel::from_parameters(const ModelConfig& config, std::size_t char_vocab_size,
                                         std::size_t word_vocab_size, std::map<std::string, Tensor> params) {
  config.validate();
  const auto specs = parameter_specs(config, char_vocab_size, word_vocab_size);
  if (specs.size() != params.size()) {
    throw DataError("expected " + std::to_string(specs.size()) + " parameter tensors, found " +
                    std::to_string(params.size()));
  }
  for (const auto& spec : specs) {
    auto it = params.find(spec.name);
    if (it == params.end()) throw DataError("missing parameter tensor '" + spec.name + "'");
    if (it->second.shape() != spec.shape) {
      throw DataError("parameter '" + spec.name + "' has shape " + shape_string(it->second.shape()) + ", expected " +
                      shape_string(spec.shape));
    }
    it->second.set_requires_grad(true);
  }
  UrlNetModel m;
  m.config_ = config;
  m.char_vocab_size_ = char_vocab_size;
  m.word_vocab_size_ = word_vocab_size;
  m.params_ = std::move(params);
  return m;
}

std::size_t UrlNetModel::expected_parameter_count(const ModelConfig& config, std::size_t char_vocab_size,
                                                  std::size_t word_vocab_size) {
  std::size_t n = 0;
  for (const auto& spec : parameter_specs(config, char_vocab_size, word_vocab_size)) {
    n += static_cast<std::size_t>(shape_size(spec.shape));
  }
  return n;
}

Tensor& UrlNetModel::parameter(const std::string& name) {
  auto it = params_.find(name);
  if (it == params_.end()) throw DataError("model has no parameter '" + name + "'");
  return it->second;
}

const Tensor& UrlNetModel::parameter(const std::string& name) const {
  auto it = params_.find(name);
  if (it == params_.end()) throw DataError("model has no parameter '" + name + "'");
  return it->second;
}

std::vector<Tensor*> UrlNetModel::trainable() {
  std::vector<Tensor*> out;
  for (auto& [name, t] : params_) out.push_back(&t);
  return out;
}

std::size_t UrlNetModel::parameter_count() const {
  std::size_t n = 0;
  for (const auto& [name, t] : params_) n += t.size();
  return n;
}

void UrlNetModel::zero_grad() {
  for (auto& [name, t] : params_) t.zero_grad();
}

Var UrlNetModel::bind(Graph& g, const std::string& name, bool bind_mutable) const {
  const Tensor& t = parameter(name);
  if (bind_mutable) return g.parameter(const_cast<Tensor&>(t));
  return g.parameter(t);
}

void UrlNetModel::check_batch(std::span<const EncodedUrl* const> batch) const {
  if (batch.empty()) throw DataError("forward: empty batch");
  const auto& L = config_.lengths;
  for (std::size_t i = 0; i < batch.size(); ++i) {
    const EncodedUrl& e = *batch[i];
    const bool ok = e.char_ids.size() == static_cast<std::size_t>(L.chars) &&
                    e.word_ids.size() == static_cast<std::size_t>(L.words) && e.word_chars == L.word_chars &&
                    e.word_char_ids.size() == static_cast<std::size_t>(L.words) * L.word_chars;
    if (!ok) {
      throw DataError("forward: example " + std::to_string(i) + " was encoded with lengths that differ from the model's (" +
                      std::to_string(L.chars) + ", " + std::to_string(L.words) + ", " +
                      std::to_string(L.word_chars) + ")");
    }
  }
}

Var UrlNetModel::char_level_word_embedding(Graph& g, Var char_table,
                                           std::span<const EncodedUrl* const> batch) const {
  const auto& L = config_.lengths;
  std::vector<int> ids;
  ids.reserve(batch.size() * L.words * L.word_chars);
  for (const EncodedUrl* e : batch) ids.insert(ids.end(), e->word_char_ids.begin(), e->word_char_ids.end());
  const Shape shape{static_cast<std::int64_t>(batch.size()), L.words, L.word_chars};
  return ops::embedding_sum(g, char_table, ids, shape, kPadId);
}

Var UrlNetModel::word_branch_input(Graph& g, Var word_table, Var char_table,
                                   std::span<const EncodedUrl* const> batch) const {
  const auto& L = config_.lengths;
  std::vector<int> ids;
  ids.reserve(batch.size() * L.words);
  for (const EncodedUrl* e : batch) ids.insert(ids.end(), e->word_ids.begin(), e->word_ids.end());
  Var words = ops::embedding_lookup(g, word_table, ids, {static_cast<std::int64_t>(batch.size()), L.words});
  if (!config_.use_char_level_words) return words;
  return ops::add(g, words, char_level_word_embedding(g, char_table, batch));
}

Var UrlNetModel::branch(Graph& g, const std::string& prefix, Var embedded, bool train, std::mt19937_64* rng,
                        bool bind_mutable) const {
  std::vector<Var> pooled;
  for (int h : config_.filter_widths) {
    const std::string base = prefix + ".conv" + std::to_string(h);
    Var c = ops::conv1d(g, embedded, bind(g, base + ".filters", bind_mutable), bind(g, base + ".bias", bind_mutable),
                        Activation::relu);
    pooled.push_back(ops::global_max_pool(g, c));
  }
  Var joined = pooled.size() == 1 ? pooled[0] : ops::concat_last(g, pooled);
  Var fc = ops::dense(g, joined, bind(g, prefix + ".fc.weight", bind_mutable), bind(g, prefix + ".fc.bias", bind_mutable),
                      Activation::relu);
  if (train && config_.dropout_rate > 0.0) return ops::dropout(g, fc, config_.dropout_rate, true, *rng);
  return fc;
}

UrlNetModel::Outputs UrlNetModel::forward_impl(Graph& g, std::span<const EncodedUrl* const> batch, bool train,
                                               std::mt19937_64* rng, bool bind_mutable) const {
  check_batch(batch);
  const auto& L = config_.lengths;
  const auto b = static_cast<std::int64_t>(batch.size());
  std::vector<Var> branches;
  if (config_.has_char_branch()) {
    std::vector<int> ids;
    ids.reserve(batch.size() * L.chars);
    for (const EncodedUrl* e : batch) ids.insert(ids.end(), e->char_ids.begin(), e->char_ids.end());
    Var emb = ops::embedding_lookup(g, bind(g, "char.embedding", bind_mutable), ids, {b, L.chars});
    branches.push_back(branch(g, "char", emb, train, rng, bind_mutable));
  }
  if (config_.has_word_branch()) {
    Var char_table = config_.use_char_level_words ? bind(g, "word.char_embedding", bind_mutable) : Var{};
    Var emb = word_branch_input(g, bind(g, "word.embedding", bind_mutable), char_table, batch);
    branches.push_back(branch(g, "word", emb, train, rng, bind_mutable));
  }
  Var features = branches.size() == 1 ? branches[0] : ops::concat_last(g, branches);
  Var h = features;
  for (std::size_t i = 0; i < config_.head_dims.size(); ++i) {
    const bool last = i + 1 == config_.head_dims.size();
    h = ops::dense(g, h, bind(g, head_name(i, "weight"), bind_mutable), bind(g, head_name(i, "bias"), bind_mutable),
                   last ? Activation::identity : Activation::relu);
  }
  return {ops::reshape(g, h, {b}), features};
}

UrlNetModel::Outputs UrlNetModel::forward(Graph& g, std::span<const EncodedUrl* const> batch, bool train,
                                          std::mt19937_64& rng) {
  return forward_impl(g, batch, train, &rng, g.grad_enabled());
}

UrlNetModel::Outputs UrlNetModel::forward(Graph& g, std::span<const EncodedUrl* const> batch) const {
  return forward_impl(g, batch, false, nullptr, false);
}

std::vector<Scalar> UrlNetModel::logits(std::span<const EncodedUrl* const> batch) const {
  check_batch(batch);
  std::vector<Scalar> out;
  out.reserve(batch.size());
  for (const EncodedUrl* e : batch) {
    Graph g(false);
    const EncodedUrl* one[] = {e};
    out.push_back(g.value(forward(g, one).logits)[0]);
  }
  return out;
}

std::vector<Scalar> UrlNetModel::feature_vector(const EncodedUrl& url) const {
  if (config_.variant != Variant::full) {
    throw UsageError("feature vectors are only defined for the full variant");
  }
  Graph g(false);
  const EncodedUrl* one[] = {&url};
  const auto out = forward(g, one);
  const auto v = g.value(out.features).data();
  return {v.begin(), v.end()};
}

}  // namespace urlnet
