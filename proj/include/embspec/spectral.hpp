#pragma once

#include <span>
#include <string>

#include <Eigen/Core>

#include "embspec/fft.hpp"
#include "embspec/signal.hpp"

namespace embspec {

inline constexpr Eigen::Index kMinSpectrumLength = 8;

/// Half-spectrum DFT of every dimension, u_j(k) for k = 0..N/2.
struct SpectrumTransform {
  Eigen::MatrixXcd half;
  Eigen::Index signal_length = 0;

  /// Per-dimension sum over all N two-sided bins of |u_j(k)|^2 / N, with the
  /// negative frequencies restored from Hermitian symmetry.
  Eigen::VectorXd two_sided_energy() const;
};

SpectrumTransform transform(const StepSignal& sig, RealFft& fft);

/// One-sided power E_j(k) = |u_j(k)|^2 / N for k = 1..N/2. The grid is
/// f_norm(k) = k / (N/2), so the last bin is Nyquist (f_norm = 1) and DC is
/// dropped. No window, no detrending, no doubling of the interior bins.
struct PowerSpectrum {
  Eigen::VectorXd f_norm;
  Eigen::MatrixXd power;  // bins x dim
  Eigen::Index signal_length = 0;

  Eigen::Index bins() const { return power.rows(); }
  Eigen::Index dim() const { return power.cols(); }
};

Eigen::VectorXd normalized_frequencies(Eigen::Index signal_length);

PowerSpectrum one_sided_power(const SpectrumTransform& t);
PowerSpectrum psd(const StepSignal& sig, RealFft& fft);
PowerSpectrum psd(const StepSignal& sig);

/// Mean across columns, accumulated in ascending column order.
template <typename Derived>
Eigen::VectorXd dimension_average(const Eigen::MatrixBase<Derived>& power) {
  Eigen::VectorXd acc = Eigen::VectorXd::Zero(power.rows());
  for (Eigen::Index j = 0; j < power.cols(); ++j) acc += power.col(j).template cast<double>();
  if (power.cols() > 0) acc /= static_cast<double>(power.cols());
  return acc;
}

inline Eigen::VectorXd dimension_average(const PowerSpectrum& spec) { return dimension_average(spec.power); }

/// Rectangle rule on the normalized grid: sum(values) * (1/K), summed in bin order.
double rectangle_integral(const Eigen::Ref<const Eigen::VectorXd>& values);

enum class NormMode { Corpus, PerDoc };

std::string to_string(NormMode mode);
NormMode parse_norm_mode(const std::string& text);

/// Dimension-averaged spectrum Ē(f) divided by sigma^2 = rectangle_integral(Ē).
struct NormalizedSpectrum {
  Eigen::VectorXd f_norm;
  Eigen::VectorXd e_mean;
  Eigen::VectorXd e_std;  // population std across documents
  double variance = 0.0;  // Corpus: sigma^2 of the averaged spectrum; PerDoc: mean of per-document sigma^2
  Eigen::Index doc_count = 0;
};

/// Combines per-document dimension-averaged spectra, in the order given.
///  Corpus: average the raw Ē_doc, then divide by the integral of the average.
///  PerDoc: scale each Ē_doc to unit integral, then average.
NormalizedSpectrum normalize_spectra(std::span<const Eigen::VectorXd> doc_means, const Eigen::VectorXd& f_norm,
                                     NormMode mode);

}  // namespace embspec
