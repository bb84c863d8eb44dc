#pragma once

#include <cstdint>
#include <string_view>
#include <vector>

#include <Eigen/Core>

#include "embspec/error.hpp"
#include "embspec/random.hpp"
#include "embspec/seqio.hpp"

namespace embspec {

/// Embedding-step signal v(t) = x(t+1) - x(t). Column j is dimension j, so
/// every per-dimension transform reads contiguous memory.
struct StepSignal {
  Eigen::MatrixXd values;

  Eigen::Index length() const { return values.rows(); }
  Eigen::Index dim() const { return values.cols(); }
};

/// Row differences of a token trajectory (rows are tokens), evaluated in double.
template <typename Derived>
StepSignal step_signal(const Eigen::MatrixBase<Derived>& trajectory) {
  if (trajectory.rows() < 2)
    throw ValidationError("step signal needs at least 2 tokens, got " + std::to_string(trajectory.rows()));
  const Eigen::Index n = trajectory.rows() - 1;
  StepSignal sig;
  sig.values = trajectory.bottomRows(n).template cast<double>() - trajectory.topRows(n).template cast<double>();
  if (!sig.values.allFinite()) throw ValidationError("step signal contains non-finite values");
  return sig;
}

StepSignal step_signal(const EmbeddingSequence& seq);

/// Per-document shuffle control. The permutation for a document is a
/// Fisher-Yates shuffle driven by mt19937_64 seeded with seed ^ fnv1a64(doc_id).
struct ShuffleSpec {
  std::uint64_t seed = 0;
};

std::uint64_t shuffle_seed(const ShuffleSpec& spec, std::string_view doc_id) noexcept;
std::vector<std::size_t> shuffle_permutation(Eigen::Index rows, const ShuffleSpec& spec, std::string_view doc_id);

/// out.row(i) = m.row(perm[i]).
template <typename Derived>
typename Derived::PlainObject permute_rows(const Eigen::MatrixBase<Derived>& m, const std::vector<std::size_t>& perm) {
  typename Derived::PlainObject out(m.rows(), m.cols());
  for (Eigen::Index i = 0; i < m.rows(); ++i) out.row(i) = m.row(static_cast<Eigen::Index>(perm[static_cast<std::size_t>(i)]));
  return out;
}

/// Permutes token rows (contextual vectors), leaving metadata untouched.
EmbeddingSequence shuffle_sequence(const EmbeddingSequence& seq, const ShuffleSpec& spec);

/// Permutes the rows of an already-differenced signal with the same generator.
StepSignal shuffle_steps(const StepSignal& sig, const ShuffleSpec& spec, std::string_view doc_id);

inline constexpr Eigen::Index kMinSynthLength = 8;
inline constexpr double kMaxSynthAlpha = 4.0;

/// One-sided Fourier coefficients c(0..N/2) with |c(k)| = (k/(N/2))^(alpha/2),
/// phases 2*pi*U[0,1) drawn in ascending k from `engine`. c(0) = 0; for even N
/// the Nyquist coefficient keeps only its real part.
Eigen::VectorXcd power_law_coefficients(Eigen::Index length, double alpha, Engine& engine);

/// Step signal whose one-sided PSD (|DFT|^2 / N) equals (k/(N/2))^alpha in
/// every bin below Nyquist. Dimensions draw independent phases from one
/// mt19937_64(seed) stream, dimension by dimension.
StepSignal synth_power_law(Eigen::Index length, Eigen::Index dim, double alpha, std::uint64_t seed);

}  // namespace embspec
