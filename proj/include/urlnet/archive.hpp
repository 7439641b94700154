#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>

#include "json.hpp"
#include "urlnet/model.hpp"
#include "urlnet/tokenizer.hpp"

namespace urlnet {

inline constexpr char kArchiveMagic[4] = {'U', 'R', 'L', 'N'};
inline constexpr std::uint32_t kArchiveVersion = 1;
inline constexpr std::uint32_t kArchiveFlagFloat32 = 1u;

// Everything needed to score raw URLs: model, both vocabularies, and
// training metadata (seed, steps, ...).
struct ModelArchive {
  UrlNetModel model;
  CharVocab char_vocab;
  WordVocab word_vocab;
  nlohmann::json metadata = nlohmann::json::object();
};

// Layout (little-endian):
//   "URLN" | u32 version | u32 flags | sections... | u32 crc32
// Each section is u32 name length, name, u64 payload length, payload. The
// sections are config (canonical JSON), charvocab, wordvocab (vocabulary text
// files), tensors (u32 count, then per tensor: u32 name length, name, u32 rank,
// u64 dims, raw scalars) and meta (JSON). The CRC32 covers every byte after
// the version field.
std::string serialize_archive(const ModelArchive& archive);
ModelArchive deserialize_archive(std::string_view bytes);

void save_model(const ModelArchive& archive, const std::filesystem::path& path);
ModelArchive load_model(const std::filesystem::path& path);

}  // namespace urlnet
