#include "embspec/corpus.hpp"

#include <algorithm>

#include "embspec/error.hpp"
#include "embspec/parallel.hpp"

namespace embspec {

std::string to_string(ShuffleLevel level) { return level == ShuffleLevel::Tokens ? "tokens" : "steps"; }

ShuffleLevel parse_shuffle_level(const std::string& text) {
  if (text == "tokens") return ShuffleLevel::Tokens;
  if (text == "steps") return ShuffleLevel::Steps;
  throw UsageError("unknown shuffle level '" + text + "' (expected tokens or steps)");
}

PowerSpectrum CorpusAccumulation::mean_power() const {
  PowerSpectrum spec;
  spec.f_norm = f_norm;
  spec.signal_length = signal_length;
  spec.power = power_sum / static_cast<double>(std::max<Eigen::Index>(1, doc_count()));
  return spec;
}

PowerSpectrum document_spectrum(const EmbeddingSequence& seq, const CorpusOptions& options, RealFft& fft) {
  StepSignal sig;
  if (options.shuffle && options.shuffle_level == ShuffleLevel::Tokens) {
    sig = step_signal(shuffle_sequence(seq, *options.shuffle));
  } else {
    sig = step_signal(seq);
    if (options.shuffle) sig = shuffle_steps(sig, *options.shuffle, seq.meta.doc_id);
  }
  if (sig.length() < kMinSpectrumLength)
    throw ValidationError("document '" + seq.meta.doc_id + "' yields " + std::to_string(sig.length()) +
                          " steps; at least " + std::to_string(kMinSpectrumLength) + " are required");
  if (fft.size() != sig.length()) fft = RealFft(sig.length());
  return psd(sig, fft);
}

namespace {

struct DocumentResult {
  Eigen::VectorXd mean;
  PowerSpectrum spectrum;
};

bool is_data_error(const std::exception_ptr& ep) {
  try {
    std::rethrow_exception(ep);
  } catch (const Error& e) {
    return e.kind() == ErrorKind::Data;
  } catch (...) {
    return false;
  }
}

std::string describe(const std::exception_ptr& ep) {
  try {
    std::rethrow_exception(ep);
  } catch (const std::exception& e) {
    return e.what();
  } catch (...) {
    return "unknown error";
  }
}

}  // namespace

CorpusAccumulation accumulate_corpus(const Manifest& manifest, const DocumentFilter& filter,
                                     const CorpusOptions& options) {
  std::vector<const ManifestEntry*> selected;
  for (const auto& entry : manifest.entries)
    if (filter(entry.meta)) selected.push_back(&entry);
  if (selected.empty()) throw EmptyGroupError("no documents selected");

  const unsigned workers = std::max(1u, options.workers);
  std::vector<RealFft> ffts;
  ffts.reserve(workers);
  for (unsigned w = 0; w < workers; ++w) ffts.emplace_back(kMinSpectrumLength);

  CorpusAccumulation acc;
  auto skip_or_throw = [&](const ManifestEntry& entry, const std::exception_ptr& ep) {
    if (options.skip_bad && is_data_error(ep)) {
      acc.skipped.push_back({entry.meta.doc_id, describe(ep)});
      return;
    }
    std::rethrow_exception(ep);
  };

  // Bounded batches keep at most a few spectra per worker in memory.
  const std::size_t batch = 4 * static_cast<std::size_t>(workers);
  std::vector<DocumentResult> results(batch);
  for (std::size_t begin = 0; begin < selected.size(); begin += batch) {
    const std::size_t count = std::min(batch, selected.size() - begin);
    auto errors = parallel_for(count, workers, [&](unsigned w, std::size_t i) {
      const EmbeddingSequence seq = load_document(*selected[begin + i]);
      results[i].spectrum = document_spectrum(seq, options, ffts[w]);
      results[i].mean = dimension_average(results[i].spectrum);
    });

    for (std::size_t i = 0; i < count; ++i) {
      const ManifestEntry& entry = *selected[begin + i];
      if (errors[i]) {
        skip_or_throw(entry, errors[i]);
        continue;
      }
      const PowerSpectrum& spec = results[i].spectrum;
      if (acc.doc_count() == 0) {
        acc.f_norm = spec.f_norm;
        acc.signal_length = spec.signal_length;
        acc.dim = spec.dim();
        acc.power_sum = Eigen::MatrixXd::Zero(spec.bins(), spec.dim());
      } else if (spec.signal_length != acc.signal_length || spec.dim() != acc.dim) {
        auto ep = std::make_exception_ptr(GridMismatchError(
            "document '" + entry.meta.doc_id + "' (" + entry.path.string() + ") has " +
            std::to_string(spec.signal_length + 1) + " tokens x " + std::to_string(spec.dim()) +
            " dims; group expects " + std::to_string(acc.signal_length + 1) + " x " + std::to_string(acc.dim)));
        skip_or_throw(entry, ep);
        continue;
      }
      acc.power_sum += spec.power;
      acc.doc_ids.push_back(entry.meta.doc_id);
      acc.doc_means.push_back(std::move(results[i].mean));
    }
  }
  if (acc.doc_count() == 0) throw EmptyGroupError("every selected document was skipped");
  return acc;
}

NormalizedSpectrum corpus_spectrum(const CorpusAccumulation& acc, NormMode mode) {
  return normalize_spectra(acc.doc_means, acc.f_norm, mode);
}

NormalizedSpectrum corpus_spectrum(const Manifest& manifest, const DocumentFilter& filter, NormMode mode,
                                   const CorpusOptions& options) {
  return corpus_spectrum(accumulate_corpus(manifest, filter, options), mode);
}

}  // namespace embspec
