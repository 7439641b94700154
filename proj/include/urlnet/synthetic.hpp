#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "urlnet/dataset.hpp"

namespace urlnet {

// Seeded generator of labelled, timestamped URLs for benchmarks and tests.
//
// Benign URLs come from a template grammar: a site name, common path words,
// slugs, numeric ids and query strings. Malicious URLs carry one or more
// injected patterns: a suspicious marker word (a misspelled or leet variant of
// a phishing term), a digit-heavy subdomain, or a '.exe' download. Marker
// variants drift over time: records in the late part of the timeline use
// spellings that never appear in the early part.
struct SyntheticOptions {
  std::size_t count = 10000;
  double malicious_fraction = 0.05;
  std::uint64_t seed = 1;
  // Fraction of the timeline (by record order) treated as "early".
  double early_fraction = 0.6;
  // Probability that a late malicious record still uses an early spelling.
  double late_reuse = 0.2;
  // Every malicious URL carries only a marker word (no other pattern) and
  // late records never reuse early spellings.
  bool marker_only = false;
  std::int64_t start_time = 1'500'000'000;
};

struct MarkerFamily {
  std::string root;
  std::vector<std::string> early;
  std::vector<std::string> late;
};

// The marker roots and their disjoint early / late spellings for a seed.
std::vector<MarkerFamily> synthetic_marker_families(std::uint64_t seed);

// Records in timestamp order, exactly round(count * malicious_fraction) malicious.
Dataset generate_synthetic(const SyntheticOptions& options);

}  // namespace urlnet
