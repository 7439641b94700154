#include <algorithm>
#include <random>
#include <sstream>

#include "doctest.h"
#include "urlnet/baseline.hpp"
#include "urlnet/dataset.hpp"
#include "urlnet/error.hpp"

using namespace urlnet;

namespace {

Dataset parse(const std::string& text) {
  std::istringstream is(text);
  return parse_dataset(is);
}

Record rec(std::string url, int label, std::int64_t ts) { return Record{std::move(url), label, ts}; }

}  // namespace

TEST_CASE("parse_dataset") {
  const auto ds = parse("+1\thttp://a.com\n-1\thttp://b.com\n");
  REQUIRE(ds.size() == 2);
  CHECK(ds.records[0] == Record{"http://a.com", 1, std::nullopt});
  CHECK(ds.records[1].label == -1);

  try {
    parse("x\thttp://a.com");
    FAIL("expected a parse error");
  } catch (const DataError& e) {
    CHECK(std::string(e.what()).find("line 1") != std::string::npos);
  }
  CHECK_THROWS_AS(parse("+1\thttp://a.com\n\n2\thttp://b.com\n"), DataError);
  CHECK_THROWS_AS(parse("+1 http://a.com\n"), DataError);
  CHECK_THROWS_AS(parse("+1\thttp://a.com\tyesterday\n"), DataError);

  const auto ts = parse("1\thttp://c.com\t30\n\n0\thttp://a.com\t10\n-1\thttp://b.com\t20\n");
  REQUIRE(ts.size() == 3);
  CHECK(ts.urls() == std::vector<std::string>{"http://c.com", "http://a.com", "http://b.com"});
  CHECK(ts.labels() == std::vector<int>{1, -1, -1});
  CHECK(ts.records[1].timestamp == 10);

  std::ostringstream os;
  write_dataset(os, ts);
  CHECK(parse(os.str()) == ts);
}

TEST_CASE("dedup keeps the first occurrence") {
  Dataset ds{{rec("http://a.com", 1, 1), rec("http://b.com", -1, 2), rec("http://a.com", -1, 3),
              rec("http://c.com", -1, 4), rec("http://d.com", 1, 5)}};
  PrepareOptions opt;
  opt.domain_cap_fraction = 0;
  const auto out = filter_records(ds, opt);
  REQUIRE(out.size() == 4);
  CHECK(out.records[0].label == 1);
  CHECK(std::count(out.records.begin(), out.records.end(), ds.records[2]) == 0);
  opt.dedup = false;
  CHECK(filter_records(ds, opt).size() == 5);
}

TEST_CASE("hostname cap") {
  Dataset ds;
  for (int i = 0; i < 100; ++i) {
    const std::string host = i % 10 == 0 ? "popular.com" : "site" + std::to_string(i) + ".org";
    ds.records.push_back(rec("http://" + host + "/p" + std::to_string(i), i % 7 == 0 ? 1 : -1, i));
  }
  PrepareOptions opt;
  opt.domain_cap_fraction = 0.05;
  const auto out = filter_records(ds, opt);
  std::vector<std::int64_t> kept;
  for (const auto& r : out.records) {
    if (split_url(r.url).hostname == "popular.com") kept.push_back(*r.timestamp);
  }
  CHECK(kept.size() <= 5);
  CHECK(kept == std::vector<std::int64_t>{0, 10, 20, 30, 40});
  CHECK(out.size() == 95);
  opt.domain_cap_fraction = 1.5;
  CHECK_THROWS_AS(filter_records(ds, opt), DataError);
}

TEST_CASE("time-ordered split") {
  Dataset ds{{rec("http://e.com", 1, 50), rec("http://a.com", -1, 10), rec("http://d.com", -1, 40),
              rec("http://b.com", 1, 20), rec("http://c.com", -1, 30)}};
  PrepareOptions opt;
  opt.domain_cap_fraction = 0;
  opt.split_fraction = 0.6;
  const auto [train, test] = prepare_dataset(ds, opt);
  CHECK(train.urls() == std::vector<std::string>{"http://a.com", "http://b.com", "http://c.com"});
  CHECK(test.urls() == std::vector<std::string>{"http://d.com", "http://e.com"});

  opt.split_fraction = 1.0;
  CHECK_THROWS_AS(prepare_dataset(ds, opt), DataError);
  Dataset untimed{{Record{"http://a.com", 1, std::nullopt}, Record{"http://b.com", -1, std::nullopt}}};
  opt.split_fraction = 0.5;
  CHECK_THROWS_AS(prepare_dataset(untimed, opt), DataError);
  opt.time_order = false;
  CHECK(prepare_dataset(untimed, opt).first.size() == 1);
}

TEST_CASE("filtering is idempotent") {
  std::mt19937_64 rng(4);
  std::uniform_int_distribution<int> host(0, 12), path(0, 5), ts(0, 1000);
  for (int trial = 0; trial < 50; ++trial) {
    Dataset ds;
    const int n = std::uniform_int_distribution<int>(1, 200)(rng);
    for (int i = 0; i < n; ++i) {
      ds.records.push_back(rec("http://h" + std::to_string(host(rng) * host(rng)) + ".com/" +
                                   std::to_string(path(rng)),
                               i % 3 ? -1 : 1, ts(rng)));
    }
    PrepareOptions opt;
    opt.domain_cap_fraction = std::uniform_real_distribution<double>(0.01, 0.3)(rng);
    const auto once = filter_records(ds, opt);
    CHECK(filter_records(once, opt) == once);
  }
}

TEST_CASE("training sample keeps order") {
  Dataset ds;
  for (int i = 0; i < 20; ++i) ds.records.push_back(rec("http://s" + std::to_string(i) + ".com", i % 2 ? 1 : -1, i));
  PrepareOptions opt;
  opt.domain_cap_fraction = 0;
  opt.split_fraction = 0.5;
  opt.sample_train = 4;
  opt.seed = 9;
  const auto [train, test] = prepare_dataset(ds, opt);
  REQUIRE(train.size() == 4);
  CHECK(test.size() == 10);
  for (std::size_t i = 1; i < train.size(); ++i) CHECK(*train.records[i].timestamp > *train.records[i - 1].timestamp);
  CHECK(prepare_dataset(ds, opt).first == train);
}
