#include "embspec/seqio.hpp"

#include <array>
#include <bit>
#include <cmath>
#include <fstream>
#include <istream>
#include <limits>
#include <ostream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "embspec/error.hpp"

namespace embspec {

namespace {

constexpr std::array<char, 4> kMagic = {'E', 'S', 'E', 'Q'};

void put_u16(unsigned char* p, std::uint16_t v) {
  p[0] = static_cast<unsigned char>(v & 0xff);
  p[1] = static_cast<unsigned char>(v >> 8);
}

void put_u32(unsigned char* p, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) p[i] = static_cast<unsigned char>((v >> (8 * i)) & 0xff);
}

std::uint16_t get_u16(const unsigned char* p) {
  return static_cast<std::uint16_t>(p[0] | (p[1] << 8));
}

std::uint32_t get_u32(const unsigned char* p) {
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(p[i]) << (8 * i);
  return v;
}

// Reads up to `count` bytes; returns how many were actually read.
std::size_t read_bytes(std::istream& in, unsigned char* dst, std::size_t count) {
  in.read(reinterpret_cast<char*>(dst), static_cast<std::streamsize>(count));
  return static_cast<std::size_t>(in.gcount());
}

}  // namespace

Language Language::parse(const std::string& text) {
  if (text == "CN") return {LanguageCode::CN, {}};
  if (text == "EN") return {LanguageCode::EN, {}};
  if (text == "DE") return {LanguageCode::DE, {}};
  if (text == "JP") return {LanguageCode::JP, {}};
  constexpr std::string_view prefix = "other:";
  if (text.size() > prefix.size() && text.starts_with(prefix))
    return {LanguageCode::Other, text.substr(prefix.size())};
  throw ValidationError("unknown language '" + text + "' (expected CN, EN, DE, JP or other:<tag>)");
}

std::string Language::str() const {
  switch (code) {
    case LanguageCode::CN: return "CN";
    case LanguageCode::EN: return "EN";
    case LanguageCode::DE: return "DE";
    case LanguageCode::JP: return "JP";
    case LanguageCode::Other: break;
  }
  return "other:" + tag;
}

std::string to_string(Source source) { return source == Source::Human ? "human" : "ai"; }

Source parse_source(const std::string& text) {
  if (text == "human") return Source::Human;
  if (text == "ai") return Source::Ai;
  throw ValidationError("unknown source '" + text + "' (expected human or ai)");
}

std::string LayerId::str() const { return index ? std::to_string(*index) : "static"; }

void validate(const EmbeddingSequence& seq) {
  if (seq.token_count() < 2)
    throw ValidationError("sequence '" + seq.meta.doc_id + "' has " +
                          std::to_string(seq.token_count()) + " tokens; at least 2 are required");
  if (seq.dim() < 1) throw ValidationError("sequence '" + seq.meta.doc_id + "' has zero dimensions");
  if (!seq.values.allFinite())
    throw ValidationError("sequence '" + seq.meta.doc_id + "' contains non-finite values");
}

void write_sequence(const EmbeddingSequence& seq, std::ostream& sink) {
  validate(seq);
  const auto rows = static_cast<std::uint64_t>(seq.token_count());
  const auto cols = static_cast<std::uint64_t>(seq.dim());
  if (rows > std::numeric_limits<std::uint32_t>::max() || cols > std::numeric_limits<std::uint32_t>::max())
    throw ValidationError("sequence dimensions exceed the u32 header range");

  std::array<unsigned char, kEseqHeaderBytes> header{};
  std::copy(kMagic.begin(), kMagic.end(), header.begin());
  put_u16(&header[4], kEseqVersion);
  header[6] = kEseqDtypeFloat32;
  header[7] = 0;
  put_u32(&header[8], static_cast<std::uint32_t>(rows));
  put_u32(&header[12], static_cast<std::uint32_t>(cols));

  std::vector<unsigned char> payload(rows * cols * 4);
  const float* src = seq.values.data();  // row-major storage is already token-major
  for (std::size_t i = 0; i < rows * cols; ++i) put_u32(&payload[4 * i], std::bit_cast<std::uint32_t>(src[i]));

  sink.write(reinterpret_cast<const char*>(header.data()), header.size());
  sink.write(reinterpret_cast<const char*>(payload.data()), static_cast<std::streamsize>(payload.size()));
  sink.flush();
  if (!sink) throw IoError("failed writing ESEQ stream");
}

EmbeddingSequence read_sequence(std::istream& source) {
  std::array<unsigned char, kEseqHeaderBytes> header{};
  const std::size_t got = read_bytes(source, header.data(), header.size());
  if (got < kMagic.size() || !std::equal(kMagic.begin(), kMagic.end(), header.begin()))
    throw FormatError("bad magic: not an ESEQ stream");
  if (got < header.size()) throw CorruptionError("truncated ESEQ header");

  const std::uint16_t version = get_u16(&header[4]);
  if (version != kEseqVersion) throw VersionError("unsupported ESEQ version " + std::to_string(version));
  if (header[6] != kEseqDtypeFloat32)
    throw VersionError("unsupported ESEQ dtype code " + std::to_string(header[6]));

  const std::uint64_t rows = get_u32(&header[8]);
  const std::uint64_t cols = get_u32(&header[12]);
  if (rows < 2) throw ValidationError("ESEQ token count " + std::to_string(rows) + " < 2");
  if (cols < 1) throw ValidationError("ESEQ dimension is zero");

  // Read incrementally so a lying header cannot force a huge allocation.
  const std::uint64_t expected = rows * cols * 4;
  std::vector<unsigned char> payload;
  constexpr std::size_t kChunk = 1 << 20;
  while (payload.size() < expected) {
    const std::size_t want = static_cast<std::size_t>(std::min<std::uint64_t>(kChunk, expected - payload.size()));
    const std::size_t old = payload.size();
    payload.resize(old + want);
    const std::size_t n = read_bytes(source, payload.data() + old, want);
    if (n < want)
      throw CorruptionError("truncated ESEQ payload: header declares " + std::to_string(expected) +
                            " bytes, found " + std::to_string(old + n));
  }
  if (source.peek() != std::char_traits<char>::eof())
    throw CorruptionError("ESEQ payload longer than the header declares");

  EmbeddingSequence seq;
  seq.values.resize(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
  float* dst = seq.values.data();
  for (std::size_t i = 0; i < rows * cols; ++i) dst[i] = std::bit_cast<float>(get_u32(&payload[4 * i]));
  if (!seq.values.allFinite()) throw ValidationError("ESEQ payload contains non-finite values");
  return seq;
}

void write_sequence_file(const EmbeddingSequence& seq, const std::filesystem::path& path) {
  validate(seq);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  write_sequence(seq, out);
}

EmbeddingSequence read_sequence_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path.string() + "'");
  return read_sequence(in);
}

EmbeddingSequence load_document(const ManifestEntry& entry) {
  EmbeddingSequence seq;
  try {
    seq = read_sequence_file(entry.path);
  } catch (const Error& e) {
    throw Error(e.kind(), "document '" + entry.meta.doc_id + "' (" + entry.path.string() + "): " + e.what());
  }
  seq.meta = entry.meta;
  return seq;
}

Manifest parse_manifest(std::istream& in, const std::filesystem::path& base_dir) {
  Manifest manifest;
  std::set<std::string> seen;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const std::string where = "manifest line " + std::to_string(lineno) + ": ";

    nlohmann::json obj;
    try {
      obj = nlohmann::json::parse(line);
    } catch (const nlohmann::json::parse_error& e) {
      throw ParseError(where + e.what());
    }
    if (!obj.is_object()) throw ParseError(where + "expected a JSON object");

    auto field = [&](const char* key) -> std::string {
      auto it = obj.find(key);
      if (it == obj.end() || !it->is_string())
        throw ParseError(where + "missing or non-string field '" + key + "'");
      return it->get<std::string>();
    };

    ManifestEntry entry;
    try {
      std::filesystem::path p = field("path");
      entry.path = (p.is_relative() && !base_dir.empty()) ? base_dir / p : p;
      entry.meta.doc_id = field("doc_id");
      entry.meta.language = Language::parse(field("language"));
      entry.meta.source = parse_source(field("source"));
      entry.meta.model_id = field("model_id");
      entry.meta.tokenizer_id = field("tokenizer_id");
    } catch (const ValidationError& e) {
      throw ParseError(where + e.what());
    }

    auto layer = obj.find("layer");
    if (layer == obj.end()) throw ParseError(where + "missing field 'layer'");
    if (layer->is_string() && layer->get<std::string>() == "static") {
      entry.meta.layer = LayerId::static_layer();
    } else if (layer->is_number_integer() && layer->get<std::int64_t>() >= 0 &&
               layer->get<std::int64_t>() <= std::numeric_limits<unsigned>::max()) {
      entry.meta.layer = LayerId::at(layer->get<unsigned>());
    } else {
      throw ParseError(where + "'layer' must be a non-negative integer or \"static\"");
    }

    if (entry.meta.doc_id.empty()) throw ValidationError(where + "empty doc_id");
    if (!seen.insert(entry.meta.doc_id).second)
      throw ValidationError(where + "duplicate doc_id '" + entry.meta.doc_id + "'");
    manifest.entries.push_back(std::move(entry));
  }
  return manifest;
}

Manifest load_manifest(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open manifest '" + path.string() + "'");
  return parse_manifest(in, path.parent_path());
}

std::string manifest_line(const std::filesystem::path& path, const DocumentMeta& meta) {
  nlohmann::ordered_json obj;
  obj["path"] = path.generic_string();
  obj["doc_id"] = meta.doc_id;
  obj["language"] = meta.language.str();
  obj["source"] = to_string(meta.source);
  obj["model_id"] = meta.model_id;
  if (meta.layer.is_static())
    obj["layer"] = "static";
  else
    obj["layer"] = *meta.layer.index;
  obj["tokenizer_id"] = meta.tokenizer_id;
  return obj.dump();
}

}  // namespace embspec
