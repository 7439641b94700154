#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace urlnet {

inline constexpr int kPadId = 0;
inline constexpr int kUnkId = 1;
inline constexpr std::string_view kPadToken = "<PAD>";
inline constexpr std::string_view kUnkToken = "<UNK>";

// ASCII lowercasing; bytes >= 0x80 pass through unchanged.
std::string to_lower(std::string_view s);

// True for bytes in [a-z0-9-_] (after lowercasing), the characters that make up words.
bool is_word_char(unsigned char c);

// Splits a URL into maximal runs of [a-z0-9-_]. With special_as_words every other
// byte is emitted as its own one-character word, in position.
std::vector<std::string> tokenize_words(std::string_view url, bool special_as_words);

// Byte frequency histogram. merge() is associative and order-independent.
class CharHistogram {
 public:
  void add(std::string_view url);
  void merge(const CharHistogram& other);
  std::int64_t count(unsigned char c) const { return counts_[c]; }
  std::int64_t documents() const { return documents_; }

 private:
  std::array<std::int64_t, 256> counts_{};
  std::int64_t documents_ = 0;
};

class WordHistogram {
 public:
  explicit WordHistogram(bool special_as_words) : special_as_words_(special_as_words) {}
  void add(std::string_view url);
  void merge(const WordHistogram& other);
  bool special_as_words() const { return special_as_words_; }
  const std::map<std::string, std::int64_t>& counts() const { return counts_; }
  std::int64_t documents() const { return documents_; }

 private:
  bool special_as_words_;
  std::map<std::string, std::int64_t> counts_;
  std::int64_t documents_ = 0;
};

class CharVocab {
 public:
  CharVocab();

  static CharVocab build(std::span<const std::string> corpus, int min_count);
  static CharVocab from_histogram(const CharHistogram& hist, int min_count);

  // Unknown bytes map to kUnkId.
  int id(unsigned char c) const { return char_to_id_[c]; }
  bool contains(unsigned char c) const { return char_to_id_[c] != kUnkId; }
  // Byte for a retained id (>= 2).
  unsigned char token(int id) const;
  std::int64_t frequency(int id) const;
  std::size_t size() const { return id_to_char_.size() + 2; }
  int pad_id() const { return kPadId; }
  int unk_id() const { return kUnkId; }
  int min_count() const { return min_count_; }

  void save(std::ostream& os) const;
  static CharVocab load(std::istream& is);
  std::string to_string() const;
  static CharVocab from_string(const std::string& text);

  bool operator==(const CharVocab& other) const = default;

 private:
  std::array<int, 256> char_to_id_{};
  std::vector<unsigned char> id_to_char_;  // index = id - 2
  std::vector<std::int64_t> frequency_;    // index = id - 2
  std::int64_t unk_frequency_ = 0;
  int min_count_ = 1;
};

class WordVocab {
 public:
  WordVocab() = default;

  static WordVocab build(std::span<const std::string> corpus, bool special_as_words,
                         int rare_threshold);
  static WordVocab from_histogram(const WordHistogram& hist, int rare_threshold);

  int id(std::string_view word) const;
  bool contains(std::string_view word) const;
  const std::string& token(int id) const;
  std::int64_t frequency(int id) const;
  std::size_t size() const { return id_to_word_.size() + 2; }
  int pad_id() const { return kPadId; }
  int unk_id() const { return kUnkId; }
  int rare_threshold() const { return rare_threshold_; }
  bool special_as_words() const { return special_as_words_; }
  // Total corpus occurrences of words folded into <UNK>.
  std::int64_t folded_occurrences() const { return unk_frequency_; }
  std::size_t folded_types() const { return folded_types_; }

  void save(std::ostream& os) const;
  static WordVocab load(std::istream& is);
  std::string to_string() const;
  static WordVocab from_string(const std::string& text);

  bool operator==(const WordVocab& other) const;

 private:
  std::unordered_map<std::string, int> word_to_id_;
  std::vector<std::string> id_to_word_;  // index = id - 2
  std::vector<std::int64_t> frequency_;  // index = id - 2
  std::int64_t unk_frequency_ = 0;
  std::size_t folded_types_ = 0;
  int rare_threshold_ = 1;
  bool special_as_words_ = false;
};

struct SequenceLengths {
  int chars = 200;       // L1
  int words = 200;       // L2
  int word_chars = 20;   // L3
};

struct EncodedUrl {
  std::vector<int> char_ids;       // L1
  std::vector<int> word_ids;       // L2
  std::vector<int> word_char_ids;  // L2 x L3, row-major
  int word_chars = 0;              // L3
  std::optional<int> label;        // -1 / +1

  std::span<const int> word_row(std::size_t i) const {
    return std::span<const int>(word_char_ids).subspan(i * word_chars, word_chars);
  }
};

EncodedUrl encode_url(std::string_view url, const CharVocab& cv, const WordVocab& wv,
                      const SequenceLengths& lengths);

// Escaping used in vocabulary files for bytes that would break the line format.
std::string escape_token(std::string_view token);
std::string unescape_token(std::string_view token);

}  // namespace urlnet
