#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>

namespace embspec {

template <typename Scalar>
using RowMatrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

enum class LanguageCode { CN, EN, DE, JP, Other };

struct Language {
  LanguageCode code = LanguageCode::Other;
  std::string tag;  // only meaningful for Other

  static Language parse(const std::string& text);
  std::string str() const;
  friend bool operator==(const Language&, const Language&) = default;
};

enum class Source { Human, Ai };

std::string to_string(Source source);
Source parse_source(const std::string& text);

/// Transformer layer index, or the static-embedding sentinel when empty.
struct LayerId {
  std::optional<unsigned> index;

  static LayerId static_layer() { return {}; }
  static LayerId at(unsigned i) { return LayerId{i}; }
  bool is_static() const { return !index.has_value(); }
  std::string str() const;
  friend bool operator==(const LayerId&, const LayerId&) = default;
};

struct DocumentMeta {
  std::string doc_id;
  Language language;
  Source source = Source::Human;
  std::string model_id;
  LayerId layer;
  std::string tokenizer_id;

  friend bool operator==(const DocumentMeta&, const DocumentMeta&) = default;
};

/// One document's token trajectory x(t): token_count rows of dim embedding values.
struct EmbeddingSequence {
  RowMatrix<float> values;
  DocumentMeta meta;

  Eigen::Index token_count() const { return values.rows(); }
  Eigen::Index dim() const { return values.cols(); }
};

/// Throws ValidationError unless token_count >= 2, dim >= 1 and every value is finite.
void validate(const EmbeddingSequence& seq);

struct ManifestEntry {
  std::filesystem::path path;  // resolved against the manifest directory
  DocumentMeta meta;
};

/// Entry order is the canonical reduction order for every corpus aggregate.
struct Manifest {
  std::vector<ManifestEntry> entries;

  bool empty() const { return entries.empty(); }
  std::size_t size() const { return entries.size(); }
};

// ESEQ v1: 16-byte little-endian header followed by T*d float32 values, token-major.
inline constexpr std::uint16_t kEseqVersion = 1;
inline constexpr std::uint8_t kEseqDtypeFloat32 = 1;
inline constexpr std::size_t kEseqHeaderBytes = 16;

/// Only the values are serialized; meta lives in the manifest.
void write_sequence(const EmbeddingSequence& seq, std::ostream& sink);
EmbeddingSequence read_sequence(std::istream& source);

void write_sequence_file(const EmbeddingSequence& seq, const std::filesystem::path& path);
EmbeddingSequence read_sequence_file(const std::filesystem::path& path);

/// Reads the file named by an entry and attaches the entry's metadata.
EmbeddingSequence load_document(const ManifestEntry& entry);

/// Relative paths are resolved against base_dir. Line numbers in errors are 1-based.
Manifest parse_manifest(std::istream& in, const std::filesystem::path& base_dir = {});
Manifest load_manifest(const std::filesystem::path& path);

/// One JSONL line (no trailing newline) for an entry; path is written as given.
std::string manifest_line(const std::filesystem::path& path, const DocumentMeta& meta);

}  // namespace embspec
