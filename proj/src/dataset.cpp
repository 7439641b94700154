#include "urlnet/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <map>
#include <numeric>
#include <ostream>
#include <random>
#include <unordered_set>

#include "urlnet/baseline.hpp"
#include "urlnet/error.hpp"

namespace urlnet {

std::vector<std::string> Dataset::urls() const {
  std::vector<std::string> out;
  out.reserve(records.size());
  for (const auto& r : records) out.push_back(r.url);
  return out;
}

std::vector<int> Dataset::labels() const {
  std::vector<int> out;
  out.reserve(records.size());
  for (const auto& r : records) out.push_back(r.label);
  return out;
}

namespace {

int parse_label(const std::string& token, std::size_t line_no) {
  if (token == "+1" || token == "1") return 1;
  if (token == "-1" || token == "0") return -1;
  throw DataError("line " + std::to_string(line_no) + ": unknown label '" + token + "'");
}

}  // namespace

Dataset parse_dataset(std::istream& is, const std::string& source) {
  Dataset ds;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(is, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto t1 = line.find('\t');
    if (t1 == std::string::npos) {
      throw DataError(source + ": line " + std::to_string(line_no) + ": expected label<TAB>url[<TAB>timestamp]");
    }
    Record r;
    try {
      r.label = parse_label(line.substr(0, t1), line_no);
    } catch (const DataError& e) {
      throw DataError(source + ": " + e.what());
    }
    const auto t2 = line.find('\t', t1 + 1);
    r.url = line.substr(t1 + 1, t2 == std::string::npos ? std::string::npos : t2 - t1 - 1);
    if (r.url.empty()) throw DataError(source + ": line " + std::to_string(line_no) + ": empty url");
    if (t2 != std::string::npos) {
      const std::string ts = line.substr(t2 + 1);
      try {
        std::size_t used = 0;
        r.timestamp = std::stoll(ts, &used);
        if (used != ts.size()) throw std::invalid_argument("trailing");
      } catch (const std::logic_error&) {
        throw DataError(source + ": line " + std::to_string(line_no) + ": bad timestamp '" + ts + "'");
      }
    }
    ds.records.push_back(std::move(r));
  }
  return ds;
}

Dataset load_dataset(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open dataset " + path.string());
  return parse_dataset(in, path.string());
}

void write_dataset(std::ostream& os, const Dataset& ds) {
  for (const auto& r : ds.records) {
    os << (r.label > 0 ? "+1" : "-1") << '\t' << r.url;
    if (r.timestamp) os << '\t' << *r.timestamp;
    os << '\n';
  }
}

std::vector<std::string> load_url_list(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open url list " + path.string());
  std::vector<std::string> urls;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (!line.empty()) urls.push_back(line);
  }
  return urls;
}

Dataset filter_records(const Dataset& ds, const PrepareOptions& options) {
  if (!(options.domain_cap_fraction >= 0.0 && options.domain_cap_fraction <= 1.0)) {
    throw DataError("domain cap fraction must be in [0, 1]");
  }
  std::vector<Record> records;
  if (options.dedup) {
    std::unordered_set<std::string> seen;
    for (const auto& r : ds.records) {
      if (seen.insert(r.url).second) records.push_back(r);
    }
  } else {
    records = ds.records;
  }
  if (options.time_order) {
    for (std::size_t i = 0; i < records.size(); ++i) {
      if (!records[i].timestamp) {
        throw DataError("record " + std::to_string(i + 1) + " has no timestamp but a time-ordered split was requested");
      }
    }
    std::stable_sort(records.begin(), records.end(),
                     [](const Record& a, const Record& b) { return *a.timestamp < *b.timestamp; });
  }
  if (options.domain_cap_fraction > 0.0) {
    std::vector<std::string> hosts;
    hosts.reserve(records.size());
    for (const auto& r : records) hosts.push_back(split_url(r.url).hostname);
    std::vector<bool> keep(records.size(), true);
    std::size_t remaining = records.size();
    while (true) {
      const auto cap = static_cast<std::size_t>(
          std::ceil(options.domain_cap_fraction * static_cast<double>(remaining) - 1e-9));
      std::map<std::string, std::size_t> per_host;
      std::size_t dropped = 0;
      for (std::size_t i = 0; i < records.size(); ++i) {
        if (!keep[i]) continue;
        if (++per_host[hosts[i]] > cap) {
          keep[i] = false;
          ++dropped;
        }
      }
      if (dropped == 0) break;
      remaining -= dropped;
    }
    std::vector<Record> kept;
    for (std::size_t i = 0; i < records.size(); ++i) {
      if (keep[i]) kept.push_back(std::move(records[i]));
    }
    records = std::move(kept);
  }
  return Dataset{std::move(records)};
}

std::pair<Dataset, Dataset> prepare_dataset(const Dataset& ds, const PrepareOptions& options) {
  if (!(options.split_fraction > 0.0 && options.split_fraction < 1.0)) {
    throw DataError("split fraction must be in (0, 1)");
  }
  Dataset all = filter_records(ds, options);
  const auto n_train = static_cast<std::size_t>(
      std::floor(options.split_fraction * static_cast<double>(all.size()) + 1e-9));
  Dataset train, test;
  train.records.assign(all.records.begin(), all.records.begin() + static_cast<std::ptrdiff_t>(n_train));
  test.records.assign(all.records.begin() + static_cast<std::ptrdiff_t>(n_train), all.records.end());
  if (options.sample_train && *options.sample_train < train.size()) {
    std::vector<std::size_t> idx(train.size());
    std::iota(idx.begin(), idx.end(), 0);
    std::mt19937_64 rng(options.seed);
    std::shuffle(idx.begin(), idx.end(), rng);
    idx.resize(*options.sample_train);
    std::sort(idx.begin(), idx.end());
    Dataset sampled;
    for (auto i : idx) sampled.records.push_back(train.records[i]);
    train = std::move(sampled);
  }
  return {std::move(train), std::move(test)};
}

std::vector<EncodedUrl> encode_dataset(const Dataset& ds, const CharVocab& cv, const WordVocab& wv,
                                       const SequenceLengths& lengths) {
  std::vector<EncodedUrl> out;
  out.reserve(ds.size());
  for (const auto& r : ds.records) {
    out.push_back(encode_url(r.url, cv, wv, lengths));
    out.back().label = r.label;
  }
  return out;
}

}  // namespace urlnet
