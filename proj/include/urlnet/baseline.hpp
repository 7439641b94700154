#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

namespace urlnet {

// Lexical decomposition of a URL. No public-suffix list: the TLD is the final
// dot-label of the hostname.
struct UrlParts {
  std::string hostname;
  std::string primary_domain;  // hostname without ".tld"
  std::string tld;
  std::string path;            // after the hostname, before '?' / '#'
  std::string query;           // after '?', before '#'
  std::vector<std::string> hostname_tokens;
  std::vector<std::string> path_tokens;  // words of everything after the hostname
  std::string last_path_token;           // final '/'-segment of path
  std::vector<std::string> argument_names;
};

UrlParts split_url(std::string_view url);

enum class Namespace : std::uint8_t { whole_url, domain, path, last_token, tld, position, bigram, trigram, expert };

std::string_view namespace_name(Namespace ns);

struct FeatureKey {
  Namespace ns;
  std::string token;
  bool operator==(const FeatureKey&) const = default;
};

struct FeatureKeyHash {
  std::size_t operator()(const FeatureKey& k) const;
};

// Namespaced token -> contiguous index map. Frozen dictionaries reject new tokens.
class FeatureDictionary {
 public:
  // Index of key, or -1.
  std::int64_t index(const FeatureKey& key) const;
  // Adds key if absent and returns its index.
  std::int64_t add(const FeatureKey& key);
  void freeze() { frozen_ = true; }
  bool frozen() const { return frozen_; }
  std::size_t size() const { return keys_.size(); }
  const FeatureKey& key(std::size_t i) const { return keys_.at(i); }
  std::size_t count(Namespace ns) const;

 private:
  std::unordered_map<FeatureKey, std::int64_t, FeatureKeyHash> index_;
  std::vector<FeatureKey> keys_;
  bool frozen_ = false;
};

// Sorted (index, value) pairs; indices are unique and < dimension.
struct SparseFeatureVector {
  std::vector<std::pair<std::int64_t, double>> entries;
  std::size_t dimension = 0;

  double value(std::int64_t index) const;
  std::size_t nonzeros() const { return entries.size(); }
};

enum class Pipeline { bow, uct, psb, trigram, combined };

std::string pipeline_name(Pipeline p);
Pipeline parse_pipeline(std::string_view name);

// Token generators for the individual pipelines (binary features, duplicates removed).
std::vector<FeatureKey> whole_url_tokens(std::string_view url);
std::vector<FeatureKey> uct_tokens(std::string_view url);
std::vector<FeatureKey> psb_tokens(std::string_view url);
std::vector<FeatureKey> trigram_tokens(std::string_view url);
std::vector<FeatureKey> pipeline_tokens(Pipeline p, std::string_view url);

// Largest right-indexed position emitted as a Domain{d} / Path{d} feature.
inline constexpr int kPsbPositionCap = 4;
// Bumped whenever an expert feature list changes.
inline constexpr int kExpertFeatureVersion = 1;

// Raw (unnormalized) statistical features.
double url_alphabet_entropy(std::string_view url);
double hostname_continuity_rate(std::string_view hostname);
double url_number_rate(std::string_view url);
std::vector<std::string> expert_feature_names(Pipeline p);
std::vector<double> expert_features(Pipeline p, std::string_view url);

// Dictionary plus expert-feature z-normalization for one pipeline. Combined
// stacks the four other pipelines at fixed offsets.
class FeatureExtractor {
 public:
  explicit FeatureExtractor(Pipeline p);
  FeatureExtractor(const FeatureExtractor&);
  FeatureExtractor& operator=(const FeatureExtractor&);
  FeatureExtractor(FeatureExtractor&&) noexcept;
  FeatureExtractor& operator=(FeatureExtractor&&) noexcept;
  ~FeatureExtractor();

  Pipeline pipeline() const { return pipeline_; }

  // Builds the dictionary and normalization statistics, then freezes.
  void fit(std::span<const std::string> corpus);
  bool fitted() const { return fitted_; }

  SparseFeatureVector transform(std::string_view url) const;
  std::size_t dimension() const;

  const FeatureDictionary& dictionary() const { return dictionary_; }
  // Component extractors and their offsets (combined only).
  std::span<const FeatureExtractor> components() const { return components_; }
  std::span<const std::size_t> offsets() const { return offsets_; }

 private:
  Pipeline pipeline_;
  bool fitted_ = false;
  FeatureDictionary dictionary_;
  std::vector<std::int64_t> expert_index_;
  std::vector<double> expert_mean_;
  std::vector<double> expert_std_;
  std::vector<FeatureExtractor> components_;
  std::vector<std::size_t> offsets_;
};

// "label index:value index:value ..." per line, indices ascending.
void write_sparse_line(std::ostream& os, int label, const SparseFeatureVector& v);

}  // namespace urlnet
