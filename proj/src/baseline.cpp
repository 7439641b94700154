#include "urlnet/baseline.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <ostream>
#include <set>

#include "urlnet/error.hpp"
#include "urlnet/tokenizer.hpp"

namespace urlnet {

UrlParts split_url(std::string_view url) {
  const std::string lower = to_lower(url);
  std::string_view rest = lower;
  if (const auto scheme = rest.find("://"); scheme != std::string_view::npos) rest.remove_prefix(scheme + 3);

  UrlParts parts;
  const auto host_end = rest.find_first_of("/?#");
  parts.hostname = std::string(rest.substr(0, host_end));
  const std::string_view remainder = host_end == std::string_view::npos ? std::string_view{} : rest.substr(host_end);

  if (const auto dot = parts.hostname.rfind('.'); dot != std::string::npos) {
    parts.tld = parts.hostname.substr(dot + 1);
    parts.primary_domain = parts.hostname.substr(0, dot);
  } else {
    parts.primary_domain = parts.hostname;
  }
  parts.hostname_tokens = tokenize_words(parts.hostname, false);

  const auto path_end = remainder.find_first_of("?#");
  parts.path = std::string(remainder.substr(0, path_end));
  if (path_end != std::string_view::npos && remainder[path_end] == '?') {
    const auto frag = remainder.find('#', path_end);
    parts.query = std::string(remainder.substr(path_end + 1, frag == std::string_view::npos ? frag : frag - path_end - 1));
  }
  parts.path_tokens = tokenize_words(remainder, false);
  if (const auto slash = parts.path.rfind('/'); slash != std::string::npos) {
    parts.last_path_token = parts.path.substr(slash + 1);
  }

  std::size_t start = 0;
  while (start <= parts.query.size() && !parts.query.empty()) {
    auto amp = parts.query.find('&', start);
    if (amp == std::string::npos) amp = parts.query.size();
    const std::string pair = parts.query.substr(start, amp - start);
    const std::string name = pair.substr(0, pair.find('='));
    if (!name.empty()) parts.argument_names.push_back(name);
    start = amp + 1;
  }
  return parts;
}

std::string_view namespace_name(Namespace ns) {
  switch (ns) {
    case Namespace::whole_url: return "whole_url";
    case Namespace::domain: return "domain";
    case Namespace::path: return "path";
    case Namespace::last_token: return "last_token";
    case Namespace::tld: return "tld";
    case Namespace::position: return "position";
    case Namespace::bigram: return "bigram";
    case Namespace::trigram: return "trigram";
    case Namespace::expert: return "expert";
  }
  return "?";
}

std::size_t FeatureKeyHash::operator()(const FeatureKey& k) const {
  return std::hash<std::string>{}(k.token) * 31u + static_cast<std::size_t>(k.ns);
}

std::int64_t FeatureDictionary::index(const FeatureKey& key) const {
  auto it = index_.find(key);
  return it == index_.end() ? -1 : it->second;
}

std::int64_t FeatureDictionary::add(const FeatureKey& key) {
  if (auto it = index_.find(key); it != index_.end()) return it->second;
  if (frozen_) throw DataError("feature dictionary is frozen; cannot add '" + key.token + "'");
  const auto id = static_cast<std::int64_t>(keys_.size());
  index_.emplace(key, id);
  keys_.push_back(key);
  return id;
}

std::size_t FeatureDictionary::count(Namespace ns) const {
  return static_cast<std::size_t>(std::count_if(keys_.begin(), keys_.end(), [ns](const FeatureKey& k) { return k.ns == ns; }));
}

double SparseFeatureVector::value(std::int64_t index) const {
  auto it = std::lower_bound(entries.begin(), entries.end(), index,
                             [](const auto& e, std::int64_t i) { return e.first < i; });
  return it != entries.end() && it->first == index ? it->second : 0.0;
}

std::string pipeline_name(Pipeline p) {
  switch (p) {
    case Pipeline::bow: return "bow";
    case Pipeline::uct: return "uct";
    case Pipeline::psb: return "psb";
    case Pipeline::trigram: return "trigram";
    case Pipeline::combined: return "combined";
  }
  return "?";
}

Pipeline parse_pipeline(std::string_view name) {
  if (name == "bow") return Pipeline::bow;
  if (name == "uct") return Pipeline::uct;
  if (name == "psb") return Pipeline::psb;
  if (name == "trigram") return Pipeline::trigram;
  if (name == "combined") return Pipeline::combined;
  throw UsageError("unknown baseline pipeline '" + std::string(name) + "' (expected bow, uct, psb, trigram or combined)");
}

namespace {

class KeySet {
 public:
  void add(Namespace ns, std::string token) {
    FeatureKey key{ns, std::move(token)};
    if (seen_.insert({static_cast<int>(ns), key.token}).second) keys_.push_back(std::move(key));
  }
  std::vector<FeatureKey> take() { return std::move(keys_); }

 private:
  std::set<std::pair<int, std::string>> seen_;
  std::vector<FeatureKey> keys_;
};

// Component BoW shared by UCT, PSB and the trigram pipeline.
void add_component_tokens(KeySet& keys, const UrlParts& parts, const std::vector<std::string>& path_tokens) {
  for (auto& w : tokenize_words(parts.primary_domain, false)) keys.add(Namespace::domain, w);
  for (const auto& w : path_tokens) keys.add(Namespace::path, w);
  if (!parts.last_path_token.empty()) keys.add(Namespace::last_token, parts.last_path_token);
  if (!parts.tld.empty()) keys.add(Namespace::tld, parts.tld);
}

void add_positional(KeySet& keys, const std::vector<std::string>& tokens, const char* part) {
  const int n = static_cast<int>(tokens.size());
  for (int d = 0; d < n && d <= kPsbPositionCap; ++d) {
    const auto& tok = tokens[n - 1 - d];
    keys.add(Namespace::position, std::string(part) + "{" + std::to_string(d) + "}=" + tok);
    if (d + 1 < n && d + 1 <= kPsbPositionCap) {
      const auto& left = tokens[n - 2 - d];
      keys.add(Namespace::bigram,
               std::string(part) + "{" + std::to_string(d + 1) + "}{" + std::to_string(d) + "}=" + left + " " + tok);
    }
  }
}

bool is_ipv4(std::string_view host) {
  int labels = 1;
  std::size_t run = 0;
  for (char c : host) {
    if (c == '.') {
      if (run == 0) return false;
      ++labels;
      run = 0;
    } else if (c >= '0' && c <= '9') {
      if (++run > 3) return false;
    } else {
      return false;
    }
  }
  return labels == 4 && run > 0;
}

double mean_length(const std::vector<std::string>& tokens) {
  if (tokens.empty()) return 0.0;
  double total = 0;
  for (const auto& t : tokens) total += static_cast<double>(t.size());
  return total / static_cast<double>(tokens.size());
}

double longest(const std::vector<std::string>& tokens) {
  std::size_t best = 0;
  for (const auto& t : tokens) best = std::max(best, t.size());
  return static_cast<double>(best);
}

double count_char(std::string_view s, char c) { return static_cast<double>(std::count(s.begin(), s.end(), c)); }

double count_digits(std::string_view s) {
  return static_cast<double>(std::count_if(s.begin(), s.end(), [](char c) { return c >= '0' && c <= '9'; }));
}

}  // namespace

std::vector<FeatureKey> whole_url_tokens(std::string_view url) {
  KeySet keys;
  for (auto& w : tokenize_words(url, false)) keys.add(Namespace::whole_url, std::move(w));
  return keys.take();
}

std::vector<FeatureKey> uct_tokens(std::string_view url) {
  KeySet keys;
  const auto parts = split_url(url);
  add_component_tokens(keys, parts, parts.path_tokens);
  return keys.take();
}

std::vector<FeatureKey> psb_tokens(std::string_view url) {
  KeySet keys;
  const auto parts = split_url(url);
  add_component_tokens(keys, parts, parts.path_tokens);
  add_positional(keys, parts.hostname_tokens, "Domain");
  add_positional(keys, parts.path_tokens, "Path");
  return keys.take();
}

std::vector<FeatureKey> trigram_tokens(std::string_view url) {
  KeySet keys;
  const auto parts = split_url(url);
  // Argument values are discarded: path words plus argument names only.
  std::vector<std::string> path_tokens = tokenize_words(parts.path, false);
  for (const auto& name : parts.argument_names) {
    for (auto& w : tokenize_words(name, false)) path_tokens.push_back(std::move(w));
  }
  add_component_tokens(keys, parts, path_tokens);
  const std::string& host = parts.hostname;
  for (std::size_t i = 0; i + 3 <= host.size(); ++i) keys.add(Namespace::trigram, host.substr(i, 3));
  return keys.take();
}

std::vector<FeatureKey> pipeline_tokens(Pipeline p, std::string_view url) {
  switch (p) {
    case Pipeline::bow: return whole_url_tokens(url);
    case Pipeline::uct: return uct_tokens(url);
    case Pipeline::psb: return psb_tokens(url);
    case Pipeline::trigram: return trigram_tokens(url);
    case Pipeline::combined: break;
  }
  throw DataError("pipeline_tokens: the combined pipeline has no token set of its own");
}

double url_alphabet_entropy(std::string_view url) {
  const std::string lower = to_lower(url);
  if (lower.empty()) return 0.0;
  std::array<std::size_t, 256> counts{};
  for (char c : lower) ++counts[static_cast<unsigned char>(c)];
  const double n = static_cast<double>(lower.size());
  double h = 0.0;
  for (auto c : counts) {
    if (c == 0) continue;
    const double p = static_cast<double>(c) / n;
    h -= p * std::log(p);
  }
  return h;
}

double hostname_continuity_rate(std::string_view hostname) {
  if (hostname.empty()) return 0.0;
  auto cls = [](char c) {
    if ((c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z')) return 0;
    if (c >= '0' && c <= '9') return 1;
    return 2;
  };
  std::array<std::size_t, 3> best{};
  std::size_t run = 0;
  int prev = -1;
  for (char c : hostname) {
    const int k = cls(c);
    run = k == prev ? run + 1 : 1;
    prev = k;
    best[k] = std::max(best[k], run);
  }
  return static_cast<double>(best[0] + best[1] + best[2]) / static_cast<double>(hostname.size());
}

double url_number_rate(std::string_view url) {
  if (url.empty()) return 0.0;
  return count_digits(url) / static_cast<double>(url.size());
}

std::vector<std::string> expert_feature_names(Pipeline p) {
  switch (p) {
    case Pipeline::bow: return {};
    case Pipeline::uct: return {"url_length", "hostname_length", "dot_count"};
    case Pipeline::psb:
      return {"url_length",         "hostname_length",      "dot_count",           "path_length",
              "path_token_count",   "domain_token_count",   "longest_domain_token", "longest_path_token",
              "mean_domain_token",  "mean_path_token",      "digit_count",         "hyphen_count",
              "slash_count",        "argument_count",       "hostname_is_ipv4",    "at_sign_count",
              "special_char_count"};
    case Pipeline::trigram:
      return {"url_length", "hostname_length", "dot_count", "alphabet_entropy", "char_continuity_rate", "number_rate"};
    case Pipeline::combined: break;
  }
  throw DataError("expert_feature_names: the combined pipeline stacks its components' features");
}

std::vector<double> expert_features(Pipeline p, std::string_view url) {
  const std::string lower = to_lower(url);
  const auto parts = split_url(lower);
  const double url_len = static_cast<double>(lower.size());
  const double host_len = static_cast<double>(parts.hostname.size());
  const double dots = count_char(lower, '.');
  switch (p) {
    case Pipeline::bow: return {};
    case Pipeline::uct: return {url_len, host_len, dots};
    case Pipeline::psb: {
      const double specials = static_cast<double>(
          std::count_if(lower.begin(), lower.end(), [](char c) { return !is_word_char(static_cast<unsigned char>(c)); }));
      return {url_len,
              host_len,
              dots,
              static_cast<double>(parts.path.size()),
              static_cast<double>(parts.path_tokens.size()),
              static_cast<double>(parts.hostname_tokens.size()),
              longest(parts.hostname_tokens),
              longest(parts.path_tokens),
              mean_length(parts.hostname_tokens),
              mean_length(parts.path_tokens),
              count_digits(lower),
              count_char(lower, '-'),
              count_char(lower, '/'),
              static_cast<double>(parts.argument_names.size()),
              is_ipv4(parts.hostname) ? 1.0 : 0.0,
              count_char(lower, '@'),
              specials};
    }
    case Pipeline::trigram:
      return {url_len, host_len, dots, url_alphabet_entropy(lower), hostname_continuity_rate(parts.hostname),
              url_number_rate(lower)};
    case Pipeline::combined: break;
  }
  throw DataError("expert_features: the combined pipeline stacks its components' features");
}

// ---------------------------------------------------------------------------

FeatureExtractor::FeatureExtractor(Pipeline p) : pipeline_(p) {
  if (p == Pipeline::combined) {
    for (Pipeline c : {Pipeline::bow, Pipeline::uct, Pipeline::psb, Pipeline::trigram}) components_.emplace_back(c);
  }
}

FeatureExtractor::FeatureExtractor(const FeatureExtractor&) = default;
FeatureExtractor& FeatureExtractor::operator=(const FeatureExtractor&) = default;
FeatureExtractor::FeatureExtractor(FeatureExtractor&&) noexcept = default;
FeatureExtractor& FeatureExtractor::operator=(FeatureExtractor&&) noexcept = default;
FeatureExtractor::~FeatureExtractor() = default;

void FeatureExtractor::fit(std::span<const std::string> corpus) {
  if (fitted_) throw DataError("feature extractor is already fitted");
  if (corpus.empty()) throw DataError("cannot fit features on an empty corpus");
  if (pipeline_ == Pipeline::combined) {
    offsets_.clear();
    std::size_t offset = 0;
    for (auto& c : components_) {
      c.fit(corpus);
      offsets_.push_back(offset);
      offset += c.dimension();
    }
    fitted_ = true;
    return;
  }
  const auto names = expert_feature_names(pipeline_);
  for (const auto& name : names) expert_index_.push_back(dictionary_.add({Namespace::expert, name}));
  std::vector<double> sum(names.size(), 0.0), sum_sq(names.size(), 0.0);
  for (const auto& url : corpus) {
    for (const auto& key : pipeline_tokens(pipeline_, url)) dictionary_.add(key);
    const auto values = expert_features(pipeline_, url);
    for (std::size_t i = 0; i < values.size(); ++i) {
      sum[i] += values[i];
      sum_sq[i] += values[i] * values[i];
    }
  }
  const double n = static_cast<double>(corpus.size());
  for (std::size_t i = 0; i < names.size(); ++i) {
    const double mean = sum[i] / n;
    const double var = std::max(0.0, sum_sq[i] / n - mean * mean);
    expert_mean_.push_back(mean);
    expert_std_.push_back(var > 1e-24 ? std::sqrt(var) : 1.0);
  }
  dictionary_.freeze();
  fitted_ = true;
}

std::size_t FeatureExtractor::dimension() const {
  if (pipeline_ != Pipeline::combined) return dictionary_.size();
  std::size_t total = 0;
  for (const auto& c : components_) total += c.dimension();
  return total;
}

SparseFeatureVector FeatureExtractor::transform(std::string_view url) const {
  if (!fitted_) throw DataError("feature extractor used before fit()");
  SparseFeatureVector out;
  out.dimension = dimension();
  if (pipeline_ == Pipeline::combined) {
    for (std::size_t c = 0; c < components_.size(); ++c) {
      for (const auto& [i, v] : components_[c].transform(url).entries) {
        out.entries.emplace_back(i + static_cast<std::int64_t>(offsets_[c]), v);
      }
    }
    return out;
  }
  for (const auto& key : pipeline_tokens(pipeline_, url)) {
    if (const auto i = dictionary_.index(key); i >= 0) out.entries.emplace_back(i, 1.0);
  }
  const auto values = expert_features(pipeline_, url);
  for (std::size_t i = 0; i < values.size(); ++i) {
    const double z = (values[i] - expert_mean_[i]) / expert_std_[i];
    if (z != 0.0) out.entries.emplace_back(expert_index_[i], z);
  }
  std::sort(out.entries.begin(), out.entries.end());
  return out;
}

void write_sparse_line(std::ostream& os, int label, const SparseFeatureVector& v) {
  os << (label > 0 ? "+1" : "-1");
  const auto old = os.precision(17);
  for (const auto& [i, x] : v.entries) os << ' ' << i << ':' << x;
  os.precision(old);
  os << '\n';
}

}  // namespace urlnet
