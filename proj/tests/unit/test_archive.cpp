#include <zlib.h>

#include <cstring>
#include <filesystem>
#include <fstream>

#include "doctest.h"
#include "urlnet/archive.hpp"
#include "urlnet/dataset.hpp"
#include "urlnet/error.hpp"
#include "urlnet/io.hpp"
#include "urlnet/training.hpp"
#include "urlnet/workflows.hpp"

using namespace urlnet;

namespace {

ModelConfig small_config() {
  ModelConfig c;
  c.variant = Variant::full;
  c.use_special_char_words = true;
  c.use_char_level_words = true;
  c.embedding_dim = 4;
  c.lengths = {40, 12, 6};
  c.filters_per_width = 4;
  c.branch_fc_dim = 8;
  c.head_dims = {8, 1};
  return c;
}

Dataset fixture() { return load_dataset(std::string(URLNET_FIXTURES) + "/urls_1000.tsv"); }

ModelArchive trained_archive() {
  const auto ds = fixture();
  Dataset head{{ds.records.begin(), ds.records.begin() + 200}};
  TrainConfig tc;
  tc.epochs = 1;
  tc.batch_size = 32;
  tc.seed = 3;
  return train_urlnet(head, Dataset{}, small_config(), tc, VocabOptions{}).archive;
}

void put_u32(std::string& bytes, std::size_t at, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) bytes[at + i] = static_cast<char>((v >> (8 * i)) & 0xff);
}

void reseal(std::string& bytes) {
  const auto* body = reinterpret_cast<const Bytef*>(bytes.data() + 8);
  put_u32(bytes, bytes.size() - 4, static_cast<std::uint32_t>(crc32(0L, body, static_cast<uInt>(bytes.size() - 12))));
}

std::string error_of(const std::string& bytes) {
  try {
    deserialize_archive(bytes);
  } catch (const DataError& e) {
    return e.what();
  }
  return "";
}

}  // namespace

TEST_CASE("save and load reproduce predictions bitwise") {
  const auto archive = trained_archive();
  const auto urls = fixture().urls();
  const auto before = score_urls(archive, urls);

  const auto dir = std::filesystem::temp_directory_path() / "urlnet_archive_test";
  std::filesystem::create_directories(dir);
  const auto path = dir / "model.urlnet";
  save_model(archive, path);
  const auto loaded = load_model(path);
  CHECK(score_urls(loaded, urls) == before);
  CHECK(loaded.model.config() == archive.model.config());
  CHECK(loaded.char_vocab == archive.char_vocab);
  CHECK(loaded.word_vocab == archive.word_vocab);
  CHECK(loaded.metadata == archive.metadata);
  CHECK(loaded.metadata.at("seed") == 3);
  CHECK(loaded.metadata.contains("steps"));
  for (const auto& [name, t] : archive.model.parameters()) CHECK(loaded.model.parameter(name) == t);
  CHECK(serialize_archive(loaded) == serialize_archive(archive));
  std::filesystem::remove_all(dir);
}

TEST_CASE("damaged archives are rejected") {
  const std::string good = serialize_archive(trained_archive());
  REQUIRE(good.compare(0, 4, "URLN") == 0);
  CHECK(error_of(good).empty());

  std::string flipped = good;
  flipped[good.size() / 2] ^= 0x01;
  CHECK(error_of(flipped) == "archive checksum mismatch");

  std::string version = good;
  put_u32(version, 4, kArchiveVersion + 1);
  CHECK(error_of(version).find("unsupported archive version 2") != std::string::npos);

  std::string magic = good;
  magic[0] = 'X';
  CHECK(error_of(magic).find("bad magic") != std::string::npos);

  for (std::size_t keep : {std::size_t{3}, std::size_t{10}, good.size() / 3, good.size() - 1}) {
    CAPTURE(keep);
    CHECK_FALSE(error_of(good.substr(0, keep)).empty());
  }

  std::string precision = good;
  put_u32(precision, 8, kArchiveFlagFloat32);
  reseal(precision);
  CHECK(error_of(precision).find("float32") != std::string::npos);

  std::string resealed = good;
  reseal(resealed);
  CHECK(error_of(resealed).empty());
}

TEST_CASE("missing archive files are data errors") {
  CHECK_THROWS_AS(load_model("/nonexistent/dir/model.urlnet"), DataError);
}

TEST_CASE("atomic writes leave no temporary files") {
  const auto dir = std::filesystem::temp_directory_path() / "urlnet_atomic_test";
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  write_file_atomic(dir / "a.txt", "one");
  write_file_atomic(dir / "a.txt", "two");
  CHECK(read_file(dir / "a.txt") == "two");
  CHECK(std::distance(std::filesystem::directory_iterator(dir), std::filesystem::directory_iterator{}) == 1);
  CHECK_THROWS_AS(write_file_atomic(dir / "missing" / "b.txt", "x"), DataError);
  std::filesystem::remove_all(dir);
}
