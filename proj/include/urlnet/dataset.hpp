#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "urlnet/tokenizer.hpp"

namespace urlnet {

struct Record {
  std::string url;
  int label = -1;  // +1 malicious, -1 benign
  std::optional<std::int64_t> timestamp;

  bool operator==(const Record&) const = default;
};

// A labelled URL collection (T records).
struct Dataset {
  std::vector<Record> records;

  std::size_t size() const { return records.size(); }
  bool empty() const { return records.empty(); }
  std::vector<std::string> urls() const;
  std::vector<int> labels() const;
  bool operator==(const Dataset&) const = default;
};

// TSV "label<TAB>url[<TAB>timestamp]"; labels +1, -1, 1 or 0 (0 means -1).
// Blank lines are skipped; malformed lines raise DataError naming the line.
Dataset parse_dataset(std::istream& is, const std::string& source = "<input>");
Dataset load_dataset(const std::filesystem::path& path);
void write_dataset(std::ostream& os, const Dataset& ds);

// Plain URL list, one per line (no labels). Used by score/embed.
std::vector<std::string> load_url_list(const std::filesystem::path& path);

struct PrepareOptions {
  bool dedup = true;
  // Per-hostname cap as a fraction of the dataset; 0 disables it.
  double domain_cap_fraction = 0.05;
  double split_fraction = 0.6;
  // Stable sort by timestamp before capping and splitting.
  bool time_order = true;
  // Keep a random subset of this many training records (order preserved).
  std::optional<std::size_t> sample_train;
  std::uint64_t seed = 0;
};

// Dedup (first occurrence wins), time sort, then the hostname cap, repeated
// until every hostname holds at most ceil(cap * N) of the N remaining records.
// Applying it to its own output changes nothing.
Dataset filter_records(const Dataset& ds, const PrepareOptions& options);

// filter_records followed by the ordered split: the first
// floor(split_fraction * N) records train, the rest test.
std::pair<Dataset, Dataset> prepare_dataset(const Dataset& ds, const PrepareOptions& options);

std::vector<EncodedUrl> encode_dataset(const Dataset& ds, const CharVocab& cv, const WordVocab& wv,
                                       const SequenceLengths& lengths);

}  // namespace urlnet
