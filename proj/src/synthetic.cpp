#include "urlnet/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <set>
#include <string_view>

#include "urlnet/error.hpp"

namespace urlnet {

namespace {

using Rng = std::mt19937_64;

constexpr std::string_view kMarkerRoots[] = {"paypal", "verify", "secure", "signin",
                                             "banking", "wallet", "confirm", "password"};

constexpr std::string_view kSyllables[] = {"ba", "be",  "ko",  "lu",  "ma",  "ne",  "ri",  "so",  "ta",
                                           "vo", "zen", "dor", "fal", "gim", "har", "jun", "kel", "mor",
                                           "nim", "pra", "qua", "ros", "tur", "wex", "yan", "cor", "dyn"};

constexpr std::string_view kPathWords[] = {
    "news",    "blog",    "article", "articles", "category", "products", "product", "search",   "about",
    "contact", "help",    "support", "images",   "img",      "video",    "sports",  "world",    "music",
    "shop",    "store",   "docs",    "wiki",     "forum",    "threads",  "events",  "team",     "careers",
    "faq",     "archive", "tags",    "users",    "profile",  "gallery",  "reviews", "recipes",  "travel",
    "health",  "tech",    "science", "games",    "movies",   "books",    "static",  "assets",   "media",
    "en",      "us",      "uk",      "de",       "fr",       "2016",     "2017",    "2018",     "2019"};

constexpr std::string_view kPageSuffixes[] = {".html", ".htm", ".php", ".aspx", "", "", "", "/"};
constexpr std::string_view kQueryKeys[] = {"id", "page", "q", "ref", "utm_source", "lang", "sort", "p"};
constexpr std::string_view kBenignTlds[] = {"com", "com", "com", "com", "org", "org", "net", "net",
                                            "edu", "io",  "co",  "gov", "info", "de", "uk", "xyz"};
constexpr std::string_view kExeNames[] = {"setup", "install", "update", "player", "codec", "invoice",
                                          "document", "flash", "crack", "patch", "viewer", "driver"};

template <typename T, std::size_t N>
const T& pick(const T (&arr)[N], Rng& rng) {
  return arr[std::uniform_int_distribution<std::size_t>(0, N - 1)(rng)];
}

template <typename T>
const T& pick(const std::vector<T>& v, Rng& rng) {
  return v[std::uniform_int_distribution<std::size_t>(0, v.size() - 1)(rng)];
}

bool chance(Rng& rng, double p) { return std::uniform_real_distribution<double>(0.0, 1.0)(rng) < p; }

int uniform_int(Rng& rng, int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); }

std::string syllable_word(Rng& rng, int lo, int hi) {
  std::string w;
  const int n = uniform_int(rng, lo, hi);
  for (int i = 0; i < n; ++i) w += pick(kSyllables, rng);
  return w;
}

std::string digits(Rng& rng, int lo, int hi) {
  std::string s;
  const int n = uniform_int(rng, lo, hi);
  for (int i = 0; i < n; ++i) s += static_cast<char>('0' + uniform_int(rng, 0, 9));
  return s;
}

char leet(char c) {
  switch (c) {
    case 'a': return '4';
    case 'e': return '3';
    case 'i': return '1';
    case 'l': return '1';
    case 'o': return '0';
    case 's': return '5';
    case 't': return '7';
    default: return c;
  }
}

std::string mutate(const std::string& root, Rng& rng) {
  std::string w = root;
  const int edits = chance(rng, 0.7) ? 1 : 2;
  for (int e = 0; e < edits; ++e) {
    const auto pos = static_cast<std::size_t>(uniform_int(rng, 0, static_cast<int>(w.size()) - 1));
    switch (uniform_int(rng, 0, 5)) {
      case 0: w[pos] = leet(w[pos]); break;
      case 1: w.insert(pos, 1, w[pos]); break;
      case 2:
        if (pos + 1 < w.size()) std::swap(w[pos], w[pos + 1]);
        break;
      case 3:
        if (pos > 0 && pos + 1 < w.size()) w.insert(pos, 1, '-');
        break;
      case 4: w += static_cast<char>('0' + uniform_int(rng, 0, 9)); break;
      case 5:
        if (w.size() > 4) w.erase(pos, 1);
        break;
    }
  }
  return w;
}

struct Sites {
  std::vector<std::string> names;
  std::discrete_distribution<std::size_t> popularity;
};

Sites make_sites(Rng& rng, std::size_t n) {
  std::set<std::string> seen;
  Sites s;
  while (s.names.size() < n) {
    std::string host = syllable_word(rng, 2, 3);
    if (chance(rng, 0.2)) host += "-" + syllable_word(rng, 1, 2);
    host += "." + std::string(pick(kBenignTlds, rng));
    if (seen.insert(host).second) s.names.push_back(host);
  }
  std::vector<double> w(n);
  for (std::size_t i = 0; i < n; ++i) w[i] = 1.0 / std::sqrt(static_cast<double>(i + 1));
  s.popularity = std::discrete_distribution<std::size_t>(w.begin(), w.end());
  return s;
}

std::string slug(Rng& rng) {
  std::string p;
  const int words = uniform_int(rng, 2, 4);
  for (int i = 0; i < words; ++i) {
    if (i > 0) p += "-";
    p += syllable_word(rng, 1, 3);
  }
  return p;
}

std::string benign_dirs(Rng& rng, int lo, int hi) {
  std::string p;
  const int segments = uniform_int(rng, lo, hi);
  for (int i = 0; i < segments; ++i) {
    p += "/";
    p += chance(rng, 0.75) ? std::string(pick(kPathWords, rng)) : syllable_word(rng, 2, 3);
  }
  return p;
}

// Optional page name and query string.
std::string benign_tail(Rng& rng, double page_probability) {
  std::string p;
  if (chance(rng, page_probability)) {
    p += "/";
    if (chance(rng, 0.5)) {
      p += slug(rng);
    } else {
      p += chance(rng, 0.5) ? digits(rng, 3, 7) : std::string(pick(kPathWords, rng));
    }
    p += pick(kPageSuffixes, rng);
  }
  if (chance(rng, 0.25)) {
    p += p.empty() ? "/?" : "?";
    const int args = uniform_int(rng, 1, 2);
    for (int i = 0; i < args; ++i) {
      if (i > 0) p += "&";
      p += std::string(pick(kQueryKeys, rng)) + "=" + (chance(rng, 0.5) ? digits(rng, 1, 5) : syllable_word(rng, 1, 2));
    }
  }
  return p;
}

std::string benign_path(Rng& rng) { return benign_dirs(rng, 0, 3) + benign_tail(rng, 0.7); }

std::string scheme(Rng& rng) { return chance(rng, 0.5) ? "https://" : "http://"; }

// A long-tail site that appears once or twice in the corpus.
std::string fresh_host(Rng& rng) {
  std::string h = syllable_word(rng, 2, 3);
  if (chance(rng, 0.2)) h += "-" + syllable_word(rng, 1, 2);
  if (chance(rng, 0.15)) h += digits(rng, 1, 2);
  return h + "." + std::string(pick(kBenignTlds, rng));
}

std::string site_host(const Sites& sites, std::discrete_distribution<std::size_t>& popularity, Rng& rng) {
  return chance(rng, 0.5) ? sites.names[popularity(rng)] : fresh_host(rng);
}

}  // namespace

std::vector<MarkerFamily> synthetic_marker_families(std::uint64_t seed) {
  Rng rng(seed ^ 0x6d61726b6572ULL);
  std::vector<MarkerFamily> families;
  for (auto root_view : kMarkerRoots) {
    MarkerFamily f;
    f.root = std::string(root_view);
    std::set<std::string> pool;
    int guard = 0;
    while (pool.size() < 16 && ++guard < 10000) {
      auto v = mutate(f.root, rng);
      if (v != f.root) pool.insert(v);
    }
    std::vector<std::string> variants(pool.begin(), pool.end());
    std::shuffle(variants.begin(), variants.end(), rng);
    const auto half = variants.size() / 2;
    f.early.assign(variants.begin(), variants.begin() + static_cast<std::ptrdiff_t>(half));
    f.late.assign(variants.begin() + static_cast<std::ptrdiff_t>(half), variants.end());
    families.push_back(std::move(f));
  }
  return families;
}

Dataset generate_synthetic(const SyntheticOptions& o) {
  if (o.count == 0) throw UsageError("synthetic count must be positive");
  if (!(o.malicious_fraction > 0.0 && o.malicious_fraction < 1.0)) {
    throw UsageError("malicious fraction must be in (0, 1)");
  }
  if (!(o.early_fraction > 0.0 && o.early_fraction < 1.0)) throw UsageError("early fraction must be in (0, 1)");
  Rng rng(o.seed);
  const auto families = synthetic_marker_families(o.seed);
  const Sites sites = make_sites(rng, 400);
  auto popularity = sites.popularity;

  const auto n_mal = static_cast<std::size_t>(std::llround(static_cast<double>(o.count) * o.malicious_fraction));
  std::vector<char> malicious(o.count, 0);
  std::fill_n(malicious.begin(), n_mal, 1);
  std::shuffle(malicious.begin(), malicious.end(), rng);
  const auto early_end = static_cast<std::size_t>(static_cast<double>(o.count) * o.early_fraction);

  Dataset ds;
  ds.records.reserve(o.count);
  std::int64_t t = o.start_time;
  for (std::size_t i = 0; i < o.count; ++i) {
    t += uniform_int(rng, 1, 120);
    Record r;
    r.timestamp = t;
    if (!malicious[i]) {
      r.label = -1;
      std::string host = (chance(rng, 0.5) ? "www." : "") + site_host(sites, popularity, rng);
      if (chance(rng, 0.005)) {
        r.url = scheme(rng) + host + "/downloads/" + syllable_word(rng, 1, 2) + "-" + std::string(pick(kExeNames, rng)) +
                ".exe";
      } else {
        r.url = scheme(rng) + host + benign_path(rng);
      }
      ds.records.push_back(std::move(r));
      continue;
    }
    r.label = 1;
    const bool late = i >= early_end;
    auto marker = [&]() {
      const auto& f = pick(families, rng);
      const bool use_late = late && (o.marker_only || !chance(rng, o.late_reuse));
      return use_late ? pick(f.late, rng) : pick(f.early, rng);
    };
    int pattern = o.marker_only ? 0 : std::discrete_distribution<int>({0.7, 0.15, 0.15})(rng);
    const bool second = !o.marker_only && chance(rng, 0.2);
    std::string host = site_host(sites, popularity, rng);
    std::string path = benign_dirs(rng, 0, 2);
    if (pattern == 1 || (second && pattern == 0)) {
      host = (chance(rng, 0.5) ? digits(rng, 6, 10) : std::string(1, static_cast<char>('a' + uniform_int(rng, 0, 25))) +
                                                          digits(rng, 5, 8)) +
             "." + host;
    }
    if (pattern == 0 || (second && pattern != 0)) {
      const auto m = marker();
      if (chance(rng, 0.2)) {
        host = m + (chance(rng, 0.5) ? "-" : ".") + host;
      } else {
        switch (uniform_int(rng, 0, 2)) {
          case 0: path += "/" + m; break;
          case 1: path += "/" + m + "-" + syllable_word(rng, 1, 2); break;
          case 2: path += "/" + syllable_word(rng, 1, 2) + "-" + m; break;
        }
      }
    }
    if (pattern == 2 || (second && pattern == 1)) {
      path += "/" + std::string(pick(kExeNames, rng)) + (chance(rng, 0.3) ? digits(rng, 1, 3) : "") + ".exe";
    } else {
      path += benign_tail(rng, 0.6);
    }
    r.url = scheme(rng) + host + path;
    ds.records.push_back(std::move(r));
  }
  return ds;
}

}  // namespace urlnet
