#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "embspec/seqio.hpp"
#include "embspec/signal.hpp"
#include "embspec/spectral.hpp"

namespace embspec {

using DocumentFilter = std::function<bool(const DocumentMeta&)>;

inline bool all_documents(const DocumentMeta&) { return true; }

/// Which rows the shuffle control permutes: the token embeddings before
/// differencing, or the step signal after it.
enum class ShuffleLevel { Tokens, Steps };

std::string to_string(ShuffleLevel level);
ShuffleLevel parse_shuffle_level(const std::string& text);

struct CorpusOptions {
  unsigned workers = 1;
  std::optional<ShuffleSpec> shuffle;
  ShuffleLevel shuffle_level = ShuffleLevel::Tokens;
  bool skip_bad = false;  // data errors become SkippedDocument records instead of aborting
};

struct SkippedDocument {
  std::string doc_id;
  std::string reason;
};

/// Running corpus totals, reduced strictly in manifest order.
struct CorpusAccumulation {
  Eigen::VectorXd f_norm;
  Eigen::Index signal_length = 0;
  Eigen::Index dim = 0;
  std::vector<std::string> doc_ids;
  std::vector<Eigen::VectorXd> doc_means;  // Ē_doc(f), one per accepted document
  Eigen::MatrixXd power_sum;               // sum over documents of E_j(f), bins x dim
  std::vector<SkippedDocument> skipped;

  Eigen::Index doc_count() const { return static_cast<Eigen::Index>(doc_ids.size()); }

  /// Corpus-averaged per-dimension spectrum.
  PowerSpectrum mean_power() const;
};

/// Spectrum of one loaded document after the optional shuffle control.
PowerSpectrum document_spectrum(const EmbeddingSequence& seq, const CorpusOptions& options, RealFft& fft);

/// Loads and transforms every selected document. Work is spread over
/// options.workers threads, but results are folded in manifest order so the
/// totals are bit-identical for any worker count.
CorpusAccumulation accumulate_corpus(const Manifest& manifest, const DocumentFilter& filter,
                                     const CorpusOptions& options = {});

NormalizedSpectrum corpus_spectrum(const CorpusAccumulation& acc, NormMode mode = NormMode::Corpus);
NormalizedSpectrum corpus_spectrum(const Manifest& manifest, const DocumentFilter& filter,
                                   NormMode mode = NormMode::Corpus, const CorpusOptions& options = {});

}  // namespace embspec
