#include "urlnet/tokenizer.hpp"

#include <algorithm>
#include <istream>
#include <ostream>
#include <sstream>

#include "urlnet/error.hpp"

namespace urlnet {

std::string to_lower(std::string_view s) {
  std::string out(s);
  for (char& c : out) {
    if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
  }
  return out;
}

bool is_word_char(unsigned char c) {
  return (c >= 'a' && c <= 'z') || (c >= '0' && c <= '9') || c == '-' || c == '_';
}

std::vector<std::string> tokenize_words(std::string_view url, bool special_as_words) {
  const std::string lower = to_lower(url);
  std::vector<std::string> words;
  std::size_t i = 0;
  while (i < lower.size()) {
    const auto c = static_cast<unsigned char>(lower[i]);
    if (is_word_char(c)) {
      std::size_t j = i;
      while (j < lower.size() && is_word_char(static_cast<unsigned char>(lower[j]))) ++j;
      words.emplace_back(lower.substr(i, j - i));
      i = j;
    } else {
      if (special_as_words) words.emplace_back(1, lower[i]);
      ++i;
    }
  }
  return words;
}

void CharHistogram::add(std::string_view url) {
  for (char c : to_lower(url)) ++counts_[static_cast<unsigned char>(c)];
  ++documents_;
}

void CharHistogram::merge(const CharHistogram& other) {
  for (std::size_t i = 0; i < counts_.size(); ++i) counts_[i] += other.counts_[i];
  documents_ += other.documents_;
}

void WordHistogram::add(std::string_view url) {
  for (auto& w : tokenize_words(url, special_as_words_)) ++counts_[std::move(w)];
  ++documents_;
}

void WordHistogram::merge(const WordHistogram& other) {
  if (other.special_as_words_ != special_as_words_) {
    throw DataError("cannot merge word histograms built with different special-word settings");
  }
  for (const auto& [w, n] : other.counts_) counts_[w] += n;
  documents_ += other.documents_;
}

namespace {

const char* kHex = "0123456789abcdef";

int hex_value(char c) {
  if (c >= '0' && c <= '9') return c - '0';
  if (c >= 'a' && c <= 'f') return c - 'a' + 10;
  if (c >= 'A' && c <= 'F') return c - 'A' + 10;
  return -1;
}

struct VocabLine {
  std::string token;
  int id;
  std::int64_t frequency;
};

VocabLine parse_vocab_line(const std::string& line, std::size_t line_no) {
  const auto t1 = line.find('\t');
  const auto t2 = t1 == std::string::npos ? t1 : line.find('\t', t1 + 1);
  if (t2 == std::string::npos) {
    throw DataError("vocabulary line " + std::to_string(line_no) + ": expected token<TAB>id<TAB>frequency");
  }
  try {
    std::size_t used = 0;
    VocabLine out{line.substr(0, t1), 0, 0};
    const std::string id_text = line.substr(t1 + 1, t2 - t1 - 1);
    const std::string freq_text = line.substr(t2 + 1);
    out.id = std::stoi(id_text, &used);
    if (used != id_text.size()) throw std::invalid_argument("id");
    out.frequency = std::stoll(freq_text, &used);
    if (used != freq_text.size()) throw std::invalid_argument("frequency");
    return out;
  } catch (const std::logic_error&) {
    throw DataError("vocabulary line " + std::to_string(line_no) + ": malformed id or frequency");
  }
}

// key=value pairs separated by spaces.
std::map<std::string, std::string> parse_params(const std::string& line) {
  std::map<std::string, std::string> out;
  std::istringstream in(line);
  std::string item;
  while (in >> item) {
    const auto eq = item.find('=');
    if (eq == std::string::npos) throw DataError("vocabulary header: malformed parameter '" + item + "'");
    out[item.substr(0, eq)] = item.substr(eq + 1);
  }
  return out;
}

std::int64_t param_int(const std::map<std::string, std::string>& params, const std::string& key) {
  auto it = params.find(key);
  if (it == params.end()) throw DataError("vocabulary header: missing parameter '" + key + "'");
  try {
    return std::stoll(it->second);
  } catch (const std::logic_error&) {
    throw DataError("vocabulary header: bad value for '" + key + "'");
  }
}

std::vector<VocabLine> read_vocab_body(std::istream& is, std::size_t first_line_no) {
  std::vector<VocabLine> lines;
  std::string line;
  std::size_t line_no = first_line_no;
  while (std::getline(is, line)) {
    ++line_no;
    if (line.empty()) continue;
    lines.push_back(parse_vocab_line(line, line_no));
  }
  for (std::size_t i = 0; i < lines.size(); ++i) {
    if (lines[i].id != static_cast<int>(i)) throw DataError("vocabulary ids are not contiguous");
  }
  if (lines.size() < 2 || lines[0].token != kPadToken || lines[1].token != kUnkToken) {
    throw DataError("vocabulary must start with <PAD> and <UNK> entries");
  }
  return lines;
}

void expect_header(std::istream& is, std::string_view magic) {
  std::string line;
  if (!std::getline(is, line) || line != magic) {
    throw DataError("vocabulary header: expected '" + std::string(magic) + "'");
  }
}

}  // namespace

std::string escape_token(std::string_view token) {
  std::string out;
  for (char ch : token) {
    const auto c = static_cast<unsigned char>(ch);
    switch (c) {
      case '\\': out += "\\\\"; break;
      case '\t': out += "\\t"; break;
      case '\n': out += "\\n"; break;
      case '\r': out += "\\r"; break;
      default:
        if (c < 0x20 || c >= 0x7f) {
          out += "\\x";
          out += kHex[c >> 4];
          out += kHex[c & 0xf];
        } else {
          out += ch;
        }
    }
  }
  return out;
}

std::string unescape_token(std::string_view token) {
  std::string out;
  for (std::size_t i = 0; i < token.size(); ++i) {
    if (token[i] != '\\') {
      out += token[i];
      continue;
    }
    if (i + 1 >= token.size()) throw DataError("dangling escape in vocabulary token");
    const char e = token[++i];
    switch (e) {
      case '\\': out += '\\'; break;
      case 't': out += '\t'; break;
      case 'n': out += '\n'; break;
      case 'r': out += '\r'; break;
      case 'x': {
        if (i + 2 >= token.size()) {
          throw DataError("truncated \\x escape in vocabulary token");
        }
        const int hi = hex_value(token[i + 1]);
        const int lo = hex_value(token[i + 2]);
        if (hi < 0 || lo < 0) throw DataError("bad \\x escape in vocabulary token");
        out += static_cast<char>(hi * 16 + lo);
        i += 2;
        break;
      }
      default: throw DataError("unknown escape in vocabulary token");
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// CharVocab

CharVocab::CharVocab() { char_to_id_.fill(kUnkId); }

CharVocab CharVocab::build(std::span<const std::string> corpus, int min_count) {
  if (corpus.empty()) throw DataError("cannot build a character vocabulary from an empty corpus");
  CharHistogram hist;
  for (const auto& url : corpus) hist.add(url);
  return from_histogram(hist, min_count);
}

CharVocab CharVocab::from_histogram(const CharHistogram& hist, int min_count) {
  if (hist.documents() == 0) throw DataError("cannot build a character vocabulary from an empty corpus");
  if (min_count < 1) throw DataError("min_count must be >= 1");
  std::vector<unsigned char> kept;
  std::int64_t unk = 0;
  for (int c = 0; c < 256; ++c) {
    const auto n = hist.count(static_cast<unsigned char>(c));
    if (n == 0) continue;
    if (n >= min_count) {
      kept.push_back(static_cast<unsigned char>(c));
    } else {
      unk += n;
    }
  }
  std::stable_sort(kept.begin(), kept.end(), [&](unsigned char a, unsigned char b) {
    return hist.count(a) > hist.count(b);
  });
  CharVocab v;
  v.min_count_ = min_count;
  v.unk_frequency_ = unk;
  for (auto c : kept) {
    v.char_to_id_[c] = static_cast<int>(v.id_to_char_.size()) + 2;
    v.id_to_char_.push_back(c);
    v.frequency_.push_back(hist.count(c));
  }
  return v;
}

unsigned char CharVocab::token(int id) const {
  if (id < 2 || id >= static_cast<int>(size())) {
    throw DataError("character id " + std::to_string(id) + " has no character");
  }
  return id_to_char_[id - 2];
}

std::int64_t CharVocab::frequency(int id) const {
  if (id == kPadId) return 0;
  if (id == kUnkId) return unk_frequency_;
  if (id < 0 || id >= static_cast<int>(size())) throw DataError("character id out of range");
  return frequency_[id - 2];
}

void CharVocab::save(std::ostream& os) const {
  os << "#charvocab v1\n";
  os << "min_count=" << min_count_ << " unk_frequency=" << unk_frequency_ << "\n";
  os << kPadToken << "\t0\t0\n";
  os << kUnkToken << "\t1\t" << unk_frequency_ << "\n";
  for (std::size_t i = 0; i < id_to_char_.size(); ++i) {
    os << escape_token(std::string(1, static_cast<char>(id_to_char_[i]))) << '\t' << i + 2 << '\t'
       << frequency_[i] << '\n';
  }
}

CharVocab CharVocab::load(std::istream& is) {
  expect_header(is, "#charvocab v1");
  std::string line;
  if (!std::getline(is, line)) throw DataError("character vocabulary: missing parameter line");
  const auto params = parse_params(line);
  CharVocab v;
  v.min_count_ = static_cast<int>(param_int(params, "min_count"));
  v.unk_frequency_ = param_int(params, "unk_frequency");
  const auto lines = read_vocab_body(is, 2);
  for (std::size_t i = 2; i < lines.size(); ++i) {
    const std::string tok = unescape_token(lines[i].token);
    if (tok.size() != 1) throw DataError("character vocabulary entry is not a single byte");
    const auto c = static_cast<unsigned char>(tok[0]);
    if (v.char_to_id_[c] != kUnkId) throw DataError("duplicate character in vocabulary");
    v.char_to_id_[c] = lines[i].id;
    v.id_to_char_.push_back(c);
    v.frequency_.push_back(lines[i].frequency);
  }
  return v;
}

std::string CharVocab::to_string() const {
  std::ostringstream os;
  save(os);
  return os.str();
}

CharVocab CharVocab::from_string(const std::string& text) {
  std::istringstream is(text);
  return load(is);
}

// ---------------------------------------------------------------------------
// WordVocab

WordVocab WordVocab::build(std::span<const std::string> corpus, bool special_as_words,
                           int rare_threshold) {
  if (corpus.empty()) throw DataError("cannot build a word vocabulary from an empty corpus");
  WordHistogram hist(special_as_words);
  for (const auto& url : corpus) hist.add(url);
  return from_histogram(hist, rare_threshold);
}

WordVocab WordVocab::from_histogram(const WordHistogram& hist, int rare_threshold) {
  if (hist.documents() == 0) throw DataError("cannot build a word vocabulary from an empty corpus");
  if (rare_threshold < 0) throw DataError("rare_threshold must be >= 0");
  std::vector<std::pair<std::string, std::int64_t>> kept;
  WordVocab v;
  v.rare_threshold_ = rare_threshold;
  v.special_as_words_ = hist.special_as_words();
  for (const auto& [w, n] : hist.counts()) {
    if (w.empty()) continue;
    if (n > rare_threshold) {
      kept.emplace_back(w, n);
    } else {
      v.unk_frequency_ += n;
      ++v.folded_types_;
    }
  }
  // counts() is ordered by byte string, so a stable sort on frequency breaks ties by code point.
  std::stable_sort(kept.begin(), kept.end(),
                   [](const auto& a, const auto& b) { return a.second > b.second; });
  for (auto& [w, n] : kept) {
    v.word_to_id_.emplace(w, static_cast<int>(v.id_to_word_.size()) + 2);
    v.id_to_word_.push_back(w);
    v.frequency_.push_back(n);
  }
  return v;
}

int WordVocab::id(std::string_view word) const {
  auto it = word_to_id_.find(std::string(word));
  return it == word_to_id_.end() ? kUnkId : it->second;
}

bool WordVocab::contains(std::string_view word) const {
  return word_to_id_.count(std::string(word)) != 0;
}

const std::string& WordVocab::token(int id) const {
  if (id < 2 || id >= static_cast<int>(size())) {
    throw DataError("word id " + std::to_string(id) + " has no word");
  }
  return id_to_word_[id - 2];
}

std::int64_t WordVocab::frequency(int id) const {
  if (id == kPadId) return 0;
  if (id == kUnkId) return unk_frequency_;
  if (id < 0 || id >= static_cast<int>(size())) throw DataError("word id out of range");
  return frequency_[id - 2];
}

bool WordVocab::operator==(const WordVocab& other) const {
  return id_to_word_ == other.id_to_word_ && frequency_ == other.frequency_ &&
         unk_frequency_ == other.unk_frequency_ && folded_types_ == other.folded_types_ &&
         rare_threshold_ == other.rare_threshold_ && special_as_words_ == other.special_as_words_;
}

void WordVocab::save(std::ostream& os) const {
  os << "#wordvocab v1\n";
  os << "rare_threshold=" << rare_threshold_ << " special_as_words=" << (special_as_words_ ? 1 : 0)
     << " unk_frequency=" << unk_frequency_ << " folded_types=" << folded_types_ << "\n";
  os << kPadToken << "\t0\t0\n";
  os << kUnkToken << "\t1\t" << unk_frequency_ << "\n";
  for (std::size_t i = 0; i < id_to_word_.size(); ++i) {
    os << escape_token(id_to_word_[i]) << '\t' << i + 2 << '\t' << frequency_[i] << '\n';
  }
}

WordVocab WordVocab::load(std::istream& is) {
  expect_header(is, "#wordvocab v1");
  std::string line;
  if (!std::getline(is, line)) throw DataError("word vocabulary: missing parameter line");
  const auto params = parse_params(line);
  WordVocab v;
  v.rare_threshold_ = static_cast<int>(param_int(params, "rare_threshold"));
  v.special_as_words_ = param_int(params, "special_as_words") != 0;
  v.unk_frequency_ = param_int(params, "unk_frequency");
  v.folded_types_ = static_cast<std::size_t>(param_int(params, "folded_types"));
  const auto lines = read_vocab_body(is, 2);
  for (std::size_t i = 2; i < lines.size(); ++i) {
    std::string tok = unescape_token(lines[i].token);
    if (tok.empty()) throw DataError("word vocabulary contains an empty word");
    if (!v.word_to_id_.emplace(tok, lines[i].id).second) {
      throw DataError("duplicate word in vocabulary: " + tok);
    }
    v.id_to_word_.push_back(std::move(tok));
    v.frequency_.push_back(lines[i].frequency);
  }
  return v;
}

std::string WordVocab::to_string() const {
  std::ostringstream os;
  save(os);
  return os.str();
}

WordVocab WordVocab::from_string(const std::string& text) {
  std::istringstream is(text);
  return load(is);
}

// ---------------------------------------------------------------------------

EncodedUrl encode_url(std::string_view url, const CharVocab& cv, const WordVocab& wv,
                      const SequenceLengths& lengths) {
  if (lengths.chars < 1 || lengths.words < 1 || lengths.word_chars < 1) {
    throw DataError("sequence lengths must be >= 1");
  }
  const std::string lower = to_lower(url);
  EncodedUrl enc;
  enc.word_chars = lengths.word_chars;
  enc.char_ids.assign(lengths.chars, kPadId);
  const std::size_t nchars = std::min<std::size_t>(lower.size(), lengths.chars);
  for (std::size_t i = 0; i < nchars; ++i) enc.char_ids[i] = cv.id(static_cast<unsigned char>(lower[i]));

  const auto words = tokenize_words(lower, wv.special_as_words());
  enc.word_ids.assign(lengths.words, kPadId);
  enc.word_char_ids.assign(static_cast<std::size_t>(lengths.words) * lengths.word_chars, kPadId);
  const std::size_t nwords = std::min<std::size_t>(words.size(), lengths.words);
  for (std::size_t i = 0; i < nwords; ++i) {
    enc.word_ids[i] = wv.id(words[i]);
    const std::size_t nc = std::min<std::size_t>(words[i].size(), lengths.word_chars);
    for (std::size_t j = 0; j < nc; ++j) {
      enc.word_char_ids[i * lengths.word_chars + j] = cv.id(static_cast<unsigned char>(words[i][j]));
    }
  }
  return enc;
}

}  // namespace urlnet
