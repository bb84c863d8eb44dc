#include "embspec/signal.hpp"

#include <cmath>
#include <numbers>

#include "embspec/fft.hpp"

namespace embspec {

StepSignal step_signal(const EmbeddingSequence& seq) {
  if (seq.token_count() < 2)
    throw ValidationError("document '" + seq.meta.doc_id + "' has fewer than 2 tokens");
  return step_signal(seq.values);
}

std::uint64_t shuffle_seed(const ShuffleSpec& spec, std::string_view doc_id) noexcept {
  return spec.seed ^ fnv1a64(doc_id);
}

std::vector<std::size_t> shuffle_permutation(Eigen::Index rows, const ShuffleSpec& spec, std::string_view doc_id) {
  return fisher_yates(static_cast<std::size_t>(rows), shuffle_seed(spec, doc_id));
}

EmbeddingSequence shuffle_sequence(const EmbeddingSequence& seq, const ShuffleSpec& spec) {
  EmbeddingSequence out;
  out.meta = seq.meta;
  out.values = permute_rows(seq.values, shuffle_permutation(seq.token_count(), spec, seq.meta.doc_id));
  return out;
}

StepSignal shuffle_steps(const StepSignal& sig, const ShuffleSpec& spec, std::string_view doc_id) {
  return StepSignal{permute_rows(sig.values, shuffle_permutation(sig.length(), spec, doc_id))};
}

Eigen::VectorXcd power_law_coefficients(Eigen::Index length, double alpha, Engine& engine) {
  const Eigen::Index half = length / 2;
  Eigen::VectorXcd c = Eigen::VectorXcd::Zero(half + 1);
  for (Eigen::Index k = 1; k <= half; ++k) {
    const double amplitude = std::pow(static_cast<double>(k) / static_cast<double>(half), alpha / 2.0);
    const double phase = 2.0 * std::numbers::pi * unit_interval(engine);
    c(k) = std::polar(amplitude, phase);
  }
  if (length % 2 == 0) c(half) = c(half).real();
  return c;
}

StepSignal synth_power_law(Eigen::Index length, Eigen::Index dim, double alpha, std::uint64_t seed) {
  if (length < kMinSynthLength)
    throw ValidationError("synthetic length " + std::to_string(length) + " < " + std::to_string(kMinSynthLength));
  if (dim < 1) throw ValidationError("synthetic dimension must be positive");
  if (!(std::abs(alpha) <= kMaxSynthAlpha)) throw ValidationError("synthetic alpha must lie in [-4, 4]");

  Engine engine(seed);
  RealFft fft(length);
  // c2r is unnormalized; 1/sqrt(N) makes |DFT(v)|^2 / N equal |c|^2.
  const double scale = 1.0 / std::sqrt(static_cast<double>(length));
  StepSignal sig;
  sig.values.resize(length, dim);
  Eigen::VectorXd column(length);
  for (Eigen::Index j = 0; j < dim; ++j) {
    fft.inverse(power_law_coefficients(length, alpha, engine), column);
    sig.values.col(j) = column * scale;
  }
  return sig;
}

}  // namespace embspec
