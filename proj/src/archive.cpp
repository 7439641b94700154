#include "urlnet/archive.hpp"

#include <bit>
#include <cstring>
#include <zlib.h>

#include "urlnet/error.hpp"
#include "urlnet/io.hpp"

namespace urlnet {

static_assert(std::endian::native == std::endian::little, "archive I/O assumes a little-endian host");

namespace {

constexpr std::uint32_t kFlags =
#ifdef URLNET_FLOAT32
    kArchiveFlagFloat32;
#else
    0u;
#endif

template <typename T>
void put(std::string& out, T v) {
  char buf[sizeof(T)];
  std::memcpy(buf, &v, sizeof(T));
  out.append(buf, sizeof(T));
}

void put_string(std::string& out, std::string_view s) {
  put<std::uint32_t>(out, static_cast<std::uint32_t>(s.size()));
  out.append(s);
}

void put_section(std::string& out, std::string_view name, std::string_view payload) {
  put_string(out, name);
  put<std::uint64_t>(out, payload.size());
  out.append(payload);
}

class Reader {
 public:
  Reader(std::string_view bytes, std::string what) : bytes_(bytes), what_(std::move(what)) {}

  template <typename T>
  T get() {
    need(sizeof(T));
    T v;
    std::memcpy(&v, bytes_.data() + pos_, sizeof(T));
    pos_ += sizeof(T);
    return v;
  }

  std::string_view take(std::uint64_t n) {
    need(n);
    auto s = bytes_.substr(pos_, n);
    pos_ += n;
    return s;
  }

  std::string_view get_string() { return take(get<std::uint32_t>()); }
  bool done() const { return pos_ == bytes_.size(); }

 private:
  void need(std::uint64_t n) const {
    if (n > bytes_.size() - pos_) throw DataError("truncated archive (" + what_ + ")");
  }

  std::string_view bytes_;
  std::string what_;
  std::size_t pos_ = 0;
};

std::uint32_t crc32_of(std::string_view bytes) {
  uLong crc = crc32(0L, Z_NULL, 0);
  std::size_t pos = 0;
  while (pos < bytes.size()) {
    const std::size_t chunk = std::min<std::size_t>(bytes.size() - pos, 1u << 30);
    crc = crc32(crc, reinterpret_cast<const Bytef*>(bytes.data() + pos), static_cast<uInt>(chunk));
    pos += chunk;
  }
  return static_cast<std::uint32_t>(crc);
}

std::string encode_tensors(const std::map<std::string, Tensor>& params) {
  std::string out;
  put<std::uint32_t>(out, static_cast<std::uint32_t>(params.size()));
  for (const auto& [name, t] : params) {
    put_string(out, name);
    put<std::uint32_t>(out, static_cast<std::uint32_t>(t.rank()));
    for (auto d : t.shape()) put<std::uint64_t>(out, static_cast<std::uint64_t>(d));
    out.append(reinterpret_cast<const char*>(t.ptr()), t.size() * sizeof(Scalar));
  }
  return out;
}

std::map<std::string, Tensor> decode_tensors(std::string_view payload) {
  Reader r(payload, "tensors");
  std::map<std::string, Tensor> params;
  const auto count = r.get<std::uint32_t>();
  for (std::uint32_t i = 0; i < count; ++i) {
    std::string name(r.get_string());
    const auto rank = r.get<std::uint32_t>();
    if (rank > 8) throw DataError("tensor '" + name + "' has implausible rank " + std::to_string(rank));
    Shape shape(rank);
    std::uint64_t n = 1;
    for (auto& d : shape) {
      const auto v = r.get<std::uint64_t>();
      if (v > (std::uint64_t{1} << 40)) throw DataError("tensor '" + name + "' has implausible dimension");
      d = static_cast<std::int64_t>(v);
      n *= v;
    }
    auto raw = r.take(n * sizeof(Scalar));
    std::vector<Scalar> data(n);
    std::memcpy(data.data(), raw.data(), raw.size());
    if (!params.emplace(name, Tensor(std::move(shape), std::move(data))).second) {
      throw DataError("duplicate tensor '" + name + "'");
    }
  }
  if (!r.done()) throw DataError("trailing bytes in tensors section");
  return params;
}

}  // namespace

std::string serialize_archive(const ModelArchive& archive) {
  std::string out(kArchiveMagic, 4);
  put<std::uint32_t>(out, kArchiveVersion);
  const std::size_t body_start = out.size();
  put<std::uint32_t>(out, kFlags);
  nlohmann::json config = archive.model.config().to_json();
  config["char_vocab_size"] = archive.model.char_vocab_size();
  config["word_vocab_size"] = archive.model.word_vocab_size();
  put_section(out, "config", config.dump());
  put_section(out, "charvocab", archive.char_vocab.to_string());
  put_section(out, "wordvocab", archive.word_vocab.to_string());
  put_section(out, "tensors", encode_tensors(archive.model.parameters()));
  put_section(out, "meta", archive.metadata.dump());
  put<std::uint32_t>(out, crc32_of(std::string_view(out).substr(body_start)));
  return out;
}

ModelArchive deserialize_archive(std::string_view bytes) {
  if (bytes.size() < 4 || std::memcmp(bytes.data(), kArchiveMagic, 4) != 0) {
    throw DataError("not a model archive (bad magic)");
  }
  Reader head(bytes.substr(4), "header");
  const auto version = head.get<std::uint32_t>();
  if (version != kArchiveVersion) {
    throw DataError("unsupported archive version " + std::to_string(version) + " (this build reads version " +
                    std::to_string(kArchiveVersion) + ")");
  }
  if (bytes.size() < 16) throw DataError("truncated archive (header)");
  const auto body = bytes.substr(8, bytes.size() - 12);
  std::uint32_t stored = 0;
  std::memcpy(&stored, bytes.data() + bytes.size() - 4, 4);
  if (crc32_of(body) != stored) throw DataError("archive checksum mismatch");

  Reader r(body, "sections");
  const auto flags = r.get<std::uint32_t>();
  if (flags != kFlags) {
    throw DataError(std::string("archive stores ") + ((flags & kArchiveFlagFloat32) ? "float32" : "float64") +
                    " tensors, this build uses " + (kFlags ? "float32" : "float64"));
  }
  std::map<std::string, std::string_view> sections;
  while (!r.done()) {
    std::string name(r.get_string());
    const auto len = r.get<std::uint64_t>();
    sections[name] = r.take(len);
  }
  auto section = [&](const std::string& name) {
    auto it = sections.find(name);
    if (it == sections.end()) throw DataError("archive is missing section '" + name + "'");
    return it->second;
  };

  nlohmann::json config_json;
  nlohmann::json meta;
  try {
    config_json = nlohmann::json::parse(section("config"));
    meta = nlohmann::json::parse(section("meta"));
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("archive JSON: ") + e.what());
  }
  const auto config = ModelConfig::from_json(config_json);
  std::size_t mc = 0;
  std::size_t mw = 0;
  try {
    mc = config_json.at("char_vocab_size").get<std::size_t>();
    mw = config_json.at("word_vocab_size").get<std::size_t>();
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("archive config: ") + e.what());
  }

  ModelArchive a{UrlNetModel::from_parameters(config, mc, mw, decode_tensors(section("tensors"))),
                 CharVocab::from_string(std::string(section("charvocab"))),
                 WordVocab::from_string(std::string(section("wordvocab"))), std::move(meta)};
  if (config.has_char_branch() || config.use_char_level_words) {
    if (a.char_vocab.size() != mc) throw DataError("character vocabulary size does not match the model");
  }
  if (config.has_word_branch() && a.word_vocab.size() != mw) {
    throw DataError("word vocabulary size does not match the model");
  }
  return a;
}

void save_model(const ModelArchive& archive, const std::filesystem::path& path) {
  write_file_atomic(path, serialize_archive(archive));
}

ModelArchive load_model(const std::filesystem::path& path) { return deserialize_archive(read_file(path)); }

}  // namespace urlnet
