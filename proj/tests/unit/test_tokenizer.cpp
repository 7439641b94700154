#include <fstream>
#include <random>
#include <sstream>

#include "doctest.h"
#include "json.hpp"
#include "urlnet/dataset.hpp"
#include "urlnet/error.hpp"
#include "urlnet/tokenizer.hpp"

using namespace urlnet;

namespace {

using Words = std::vector<std::string>;

nlohmann::json oracle() {
  std::ifstream in(std::string(URLNET_FIXTURES) + "/oracle_expected.json");
  return nlohmann::json::parse(in);
}

std::vector<std::string> fixture_urls() { return load_dataset(std::string(URLNET_FIXTURES) + "/urls_1000.tsv").urls(); }

std::string random_string(std::mt19937_64& rng, std::size_t n) {
  std::uniform_int_distribution<int> byte(1, 255);
  std::string s(n, ' ');
  for (auto& c : s) c = static_cast<char>(byte(rng));
  return s;
}

}  // namespace

TEST_CASE("tokenize_words splits on special characters") {
  CHECK(tokenize_words("http://test.com/a.exe", false) == Words{"http", "test", "com", "a", "exe"});
  CHECK(tokenize_words("http://test.com/a.exe", true) ==
        Words{"http", ":", "/", "/", "test", ".", "com", "/", "a", ".", "exe"});
  CHECK(tokenize_words("", true).empty());
  CHECK(tokenize_words("", false).empty());
}

TEST_CASE("tokenize_words keeps dashes and underscores and lowercases") {
  CHECK(tokenize_words("My-Site_01.COM", false) == Words{"my-site_01", "com"});
  CHECK(tokenize_words("a..b", true) == Words{"a", ".", ".", "b"});
  CHECK(tokenize_words("///", false).empty());
}

TEST_CASE("char vocab on tiny corpora") {
  const std::vector<std::string> two{"ab", "ab"};
  const auto v = CharVocab::build(two, 1);
  CHECK(v.size() == 4);
  CHECK(v.id('a') >= 2);
  CHECK(v.id('b') >= 2);
  CHECK(v.id('a') != v.id('b'));
  CHECK(v.pad_id() == 0);
  CHECK(v.unk_id() == 1);

  const std::vector<std::string> three{"ab", "ab", "c"};
  const auto w = CharVocab::build(three, 2);
  CHECK(w.size() == 4);
  CHECK_FALSE(w.contains('c'));
  const auto enc = encode_url("c", w, WordVocab::build(three, false, 1), {3, 2, 2});
  CHECK(enc.char_ids[0] == kUnkId);
}

TEST_CASE("char vocab orders ids by frequency then code point") {
  const std::vector<std::string> corpus{"bbbaac", "dd"};
  const auto v = CharVocab::build(corpus, 1);
  CHECK(v.id('b') == 2);
  CHECK(v.id('a') == 3);
  CHECK(v.id('d') == 4);
  CHECK(v.id('c') == 5);
  for (int id = 2; id < static_cast<int>(v.size()); ++id) CHECK(v.id(v.token(id)) == id);
}

TEST_CASE("vocabularies reject empty corpora") {
  const std::vector<std::string> empty;
  CHECK_THROWS_AS(CharVocab::build(empty, 1), DataError);
  CHECK_THROWS_AS(WordVocab::build(empty, false, 1), DataError);
  const std::vector<std::string> one{"a"};
  CHECK_THROWS_AS(CharVocab::build(one, 0), DataError);
}

TEST_CASE("word vocab folds rare words") {
  const std::vector<std::string> corpus{"a.a", "a.b"};
  const auto plain = WordVocab::build(corpus, false, 1);
  CHECK(plain.size() == 3);
  CHECK(plain.contains("a"));
  CHECK_FALSE(plain.contains("b"));
  CHECK(plain.id("b") == kUnkId);
  CHECK(plain.folded_types() == 1);
  CHECK(plain.folded_occurrences() == 1);

  const auto special = WordVocab::build(corpus, true, 0);
  CHECK(special.size() == 5);
  CHECK(special.contains("a"));
  CHECK(special.contains("b"));
  CHECK(special.contains("."));
  CHECK_FALSE(special.contains(""));
}

TEST_CASE("fixture vocabulary sizes match the histogram oracle") {
  const auto expected = oracle()["vocab_1000"];
  const auto urls = fixture_urls();
  CHECK(CharVocab::build(urls, 1).size() == expected["char_types"].get<std::size_t>() + 2);
  CHECK(CharVocab::build(urls, 2).size() == expected["char_types_min2"].get<std::size_t>() + 2);
  CHECK(CharVocab::build(urls, 100).size() == expected["char_types_min100"].get<std::size_t>() + 2);

  const auto plain = WordVocab::build(urls, false, 1);
  CHECK(plain.size() == expected["words_retained_plain_t1"].get<std::size_t>() + 2);
  CHECK(plain.folded_occurrences() == expected["words_folded_occurrences_plain_t1"].get<std::int64_t>());
  CHECK(WordVocab::build(urls, false, 2).size() == expected["words_retained_plain_t2"].get<std::size_t>() + 2);
  CHECK(WordVocab::build(urls, true, 1).size() == expected["words_retained_special_t1"].get<std::size_t>() + 2);
  CHECK(WordVocab::build(urls, true, 2).size() == expected["words_retained_special_t2"].get<std::size_t>() + 2);

  const double types = expected["word_types_plain"].get<double>();
  CHECK(static_cast<double>(plain.folded_types()) / types > 0.5);
  CHECK(plain.folded_types() + plain.size() - 2 == expected["word_types_plain"].get<std::size_t>());
}

TEST_CASE("raising the rare threshold never retains more words") {
  const auto urls = fixture_urls();
  std::size_t previous = WordVocab::build(urls, false, 0).size();
  for (int t = 1; t <= 6; ++t) {
    const auto size = WordVocab::build(urls, false, t).size();
    CHECK(size <= previous);
    previous = size;
  }
}

TEST_CASE("vocabulary building is deterministic") {
  const auto urls = fixture_urls();
  CHECK(CharVocab::build(urls, 1) == CharVocab::build(urls, 1));
  CHECK(WordVocab::build(urls, true, 1) == WordVocab::build(urls, true, 1));
  CHECK(WordVocab::build(urls, true, 1).to_string() == WordVocab::build(urls, true, 1).to_string());
}

TEST_CASE("histogram merge is order independent") {
  const auto urls = fixture_urls();
  CharHistogram a, b, c;
  WordHistogram wa(true), wb(true), wc(true);
  for (std::size_t i = 0; i < urls.size(); ++i) {
    (i % 3 == 0 ? a : i % 3 == 1 ? b : c).add(urls[i]);
    (i % 3 == 0 ? wa : i % 3 == 1 ? wb : wc).add(urls[i]);
  }
  CharHistogram left = a;
  left.merge(b);
  left.merge(c);
  CharHistogram right = c;
  CharHistogram bc = b;
  bc.merge(a);
  right.merge(bc);
  CHECK(CharVocab::from_histogram(left, 1) == CharVocab::from_histogram(right, 1));
  CHECK(CharVocab::from_histogram(left, 1) == CharVocab::build(urls, 1));

  WordHistogram wl = wa;
  wl.merge(wb);
  wl.merge(wc);
  WordHistogram wr = wc;
  wr.merge(wa);
  wr.merge(wb);
  CHECK(wl.counts() == wr.counts());
  CHECK(WordVocab::from_histogram(wl, 1) == WordVocab::build(urls, true, 1));
  WordHistogram plain(false);
  CHECK_THROWS_AS(plain.merge(wa), DataError);
}

TEST_CASE("vocabulary files reload bit-exactly") {
  std::vector<std::string> urls = fixture_urls();
  urls.push_back(std::string("tab\there\nnew\\line\x01\xff"));
  const auto cv = CharVocab::build(urls, 1);
  const auto wv = WordVocab::build(urls, true, 1);
  const auto cv_text = cv.to_string();
  const auto wv_text = wv.to_string();
  CHECK(cv_text.rfind("#charvocab v1\n", 0) == 0);
  CHECK(wv_text.rfind("#wordvocab v1\n", 0) == 0);
  CHECK(CharVocab::from_string(cv_text) == cv);
  CHECK(WordVocab::from_string(wv_text) == wv);
  CHECK(CharVocab::from_string(cv_text).to_string() == cv_text);
  CHECK(WordVocab::from_string(wv_text).to_string() == wv_text);
  CHECK_THROWS_AS(CharVocab::from_string(wv_text), DataError);
  CHECK_THROWS_AS(WordVocab::from_string("#wordvocab v1\nrare_threshold=1\n"), DataError);
}

TEST_CASE("vocabulary token escaping round trips") {
  for (const std::string s : {std::string("plain"), std::string("a\tb"), std::string("\\"), std::string("\n\r"),
                              std::string("\x01\x7f\xfe", 3)}) {
    CHECK(unescape_token(escape_token(s)) == s);
    CHECK(escape_token(s).find('\t') == std::string::npos);
  }
  CHECK_THROWS_AS(unescape_token("\\x4"), DataError);
  CHECK_THROWS_AS(unescape_token("\\q"), DataError);
}

TEST_CASE("encode_url pads short urls") {
  const std::string url = "http://example.com/ab";
  REQUIRE(url.size() == 21);
  const std::vector<std::string> corpus{url};
  const auto cv = CharVocab::build(corpus, 1);
  const auto wv = WordVocab::build(corpus, false, 0);
  const auto enc = encode_url(url, cv, wv, {});
  REQUIRE(enc.char_ids.size() == 200);
  CHECK(std::count(enc.char_ids.begin(), enc.char_ids.begin() + 21, kPadId) == 0);
  CHECK(std::count(enc.char_ids.begin() + 21, enc.char_ids.end(), kPadId) == 179);
  CHECK(enc.word_ids.size() == 200);
  CHECK(enc.word_char_ids.size() == 200 * 20);
  CHECK(enc.word_chars == 20);
}

TEST_CASE("encode_url keeps character ids for out-of-vocabulary words") {
  const std::vector<std::string> corpus{"http://good.com", "http://good.com"};
  const auto cv = CharVocab::build(corpus, 1);
  const auto wv = WordVocab::build(corpus, false, 1);
  const auto enc = encode_url("http://dog.com", cv, wv, {50, 10, 5});
  CHECK(enc.word_ids[0] == wv.id("http"));
  CHECK(enc.word_ids[1] == kUnkId);
  const auto row = enc.word_row(1);
  CHECK(row[0] == cv.id('d'));
  CHECK(row[1] == cv.id('o'));
  CHECK(row[2] == cv.id('g'));
  CHECK(row[0] != kUnkId);
  CHECK(row[3] == kPadId);
  CHECK(row[4] == kPadId);
  CHECK(enc.word_ids[3] == kPadId);
  for (int v : enc.word_row(3)) CHECK(v == kPadId);
}

TEST_CASE("encode_url truncates to the prefix") {
  std::string url = "http://long.example/";
  while (url.size() < 240) url += static_cast<char>('a' + url.size() % 26);
  const std::vector<std::string> corpus{url};
  const auto cv = CharVocab::build(corpus, 1);
  const auto wv = WordVocab::build(corpus, true, 0);
  const auto enc = encode_url(url, cv, wv, {});
  REQUIRE(enc.char_ids.size() == 200);
  for (std::size_t i = 0; i < 200; ++i) CHECK(enc.char_ids[i] == cv.id(static_cast<unsigned char>(url[i])));

  const auto words = tokenize_words(url, true);
  const auto short_enc = encode_url(url, cv, wv, {10, 3, 4});
  for (std::size_t i = 0; i < 3; ++i) CHECK(short_enc.word_ids[i] == wv.id(words[i]));
  const auto row = short_enc.word_row(0);
  CHECK(row[3] == cv.id('p'));
}

TEST_CASE("decoding word ids reproduces the tokenization") {
  const auto urls = fixture_urls();
  const auto wv = WordVocab::build(urls, true, 0);
  const auto cv = CharVocab::build(urls, 1);
  int checked = 0;
  for (const auto& u : urls) {
    const auto words = tokenize_words(u, true);
    if (words.size() > 200) continue;
    const auto enc = encode_url(u, cv, wv, {});
    Words decoded;
    for (int id : enc.word_ids) {
      if (id == kPadId) break;
      decoded.push_back(wv.token(id));
    }
    CHECK(decoded == words);
    ++checked;
  }
  CHECK(checked > 900);
}

TEST_CASE("encoded shapes do not depend on input length") {
  std::mt19937_64 rng(17);
  const auto urls = fixture_urls();
  const auto cv = CharVocab::build(urls, 1);
  const auto wv = WordVocab::build(urls, true, 1);
  const SequenceLengths lengths{};
  std::uniform_int_distribution<std::size_t> len(0, 10000);
  for (int trial = 0; trial < 200; ++trial) {
    const auto s = random_string(rng, trial < 3 ? std::size_t(trial) : len(rng));
    const auto enc = encode_url(s, cv, wv, lengths);
    REQUIRE(enc.char_ids.size() == 200);
    REQUIRE(enc.word_ids.size() == 200);
    REQUIRE(enc.word_char_ids.size() == 200 * 20);
    for (int id : enc.char_ids) REQUIRE((id >= 0 && id < static_cast<int>(cv.size())));
    for (int id : enc.word_ids) REQUIRE((id >= 0 && id < static_cast<int>(wv.size())));
    // Padding only as a contiguous suffix.
    auto suffix_only = [](std::span<const int> ids) {
      auto first_pad = std::find(ids.begin(), ids.end(), kPadId);
      return std::all_of(first_pad, ids.end(), [](int v) { return v == kPadId; });
    };
    REQUIRE(suffix_only(enc.char_ids));
    REQUIRE(suffix_only(enc.word_ids));
    for (int r = 0; r < 200; ++r) REQUIRE(suffix_only(enc.word_row(r)));
  }
}

TEST_CASE("to_lower only touches ASCII letters") {
  CHECK(to_lower("AbC\xc4Z") == "abc\xc4z");
  CHECK(is_word_char('-'));
  CHECK(is_word_char('_'));
  CHECK(is_word_char('7'));
  CHECK_FALSE(is_word_char('.'));
  CHECK_FALSE(is_word_char('A'));
}
