#include "embspec/spectral.hpp"

#include <cmath>

#include "embspec/error.hpp"

namespace embspec {

Eigen::VectorXd SpectrumTransform::two_sided_energy() const {
  const Eigen::Index n = signal_length;
  const Eigen::Index last = n / 2;
  Eigen::VectorXd energy(half.cols());
  for (Eigen::Index j = 0; j < half.cols(); ++j) {
    double e = std::norm(half(0, j));
    // Bins 1..ceil(N/2)-1 each have a mirror at N-k; the Nyquist bin of an even N does not.
    for (Eigen::Index k = 1; k < last; ++k) e += 2.0 * std::norm(half(k, j));
    if (last > 0) e += (n % 2 == 0 ? 1.0 : 2.0) * std::norm(half(last, j));
    energy(j) = e / static_cast<double>(n);
  }
  return energy;
}

SpectrumTransform transform(const StepSignal& sig, RealFft& fft) {
  if (sig.length() < kMinSpectrumLength)
    throw ValidationError("spectrum needs at least " + std::to_string(kMinSpectrumLength) + " steps, got " +
                          std::to_string(sig.length()));
  if (fft.size() != sig.length()) throw ValidationError("FFT length does not match signal length");
  SpectrumTransform t;
  t.signal_length = sig.length();
  t.half.resize(fft.half_size(), sig.dim());
  for (Eigen::Index j = 0; j < sig.dim(); ++j) fft.forward(sig.values.col(j), t.half.col(j));
  return t;
}

Eigen::VectorXd normalized_frequencies(Eigen::Index signal_length) {
  const Eigen::Index half = signal_length / 2;
  Eigen::VectorXd f(half);
  for (Eigen::Index k = 1; k <= half; ++k) f(k - 1) = static_cast<double>(k) / static_cast<double>(half);
  return f;
}

PowerSpectrum one_sided_power(const SpectrumTransform& t) {
  const Eigen::Index half = t.signal_length / 2;
  PowerSpectrum spec;
  spec.signal_length = t.signal_length;
  spec.f_norm = normalized_frequencies(t.signal_length);
  spec.power = t.half.middleRows(1, half).cwiseAbs2() / static_cast<double>(t.signal_length);
  return spec;
}

PowerSpectrum psd(const StepSignal& sig, RealFft& fft) { return one_sided_power(transform(sig, fft)); }

PowerSpectrum psd(const StepSignal& sig) {
  if (sig.length() < kMinSpectrumLength)
    throw ValidationError("spectrum needs at least " + std::to_string(kMinSpectrumLength) + " steps, got " +
                          std::to_string(sig.length()));
  RealFft fft(sig.length());
  return psd(sig, fft);
}

double rectangle_integral(const Eigen::Ref<const Eigen::VectorXd>& values) {
  double sum = 0.0;
  for (Eigen::Index k = 0; k < values.size(); ++k) sum += values(k);
  return sum / static_cast<double>(values.size());
}

std::string to_string(NormMode mode) { return mode == NormMode::Corpus ? "corpus" : "per-doc"; }

NormMode parse_norm_mode(const std::string& text) {
  if (text == "corpus") return NormMode::Corpus;
  if (text == "per-doc") return NormMode::PerDoc;
  throw UsageError("unknown normalization mode '" + text + "' (expected corpus or per-doc)");
}

namespace {

double checked_variance(const Eigen::VectorXd& spectrum, const char* what) {
  const double v = rectangle_integral(spectrum);
  if (!(v > 0.0) || !std::isfinite(v))
    throw FitDomainError(std::string("cannot normalize ") + what + ": total power is not positive");
  return v;
}

}  // namespace

NormalizedSpectrum normalize_spectra(std::span<const Eigen::VectorXd> doc_means, const Eigen::VectorXd& f_norm,
                                     NormMode mode) {
  if (doc_means.empty()) throw EmptyGroupError("no documents to normalize");
  const Eigen::Index bins = f_norm.size();
  for (const auto& d : doc_means)
    if (d.size() != bins) throw GridMismatchError("document spectrum length differs from the frequency grid");

  const auto count = static_cast<double>(doc_means.size());
  NormalizedSpectrum out;
  out.f_norm = f_norm;
  out.doc_count = static_cast<Eigen::Index>(doc_means.size());

  // Per-document spectra on the normalized scale, in input order.
  std::vector<Eigen::VectorXd> scaled;
  scaled.reserve(doc_means.size());
  if (mode == NormMode::Corpus) {
    Eigen::VectorXd mean = Eigen::VectorXd::Zero(bins);
    for (const auto& d : doc_means) mean += d;
    mean /= count;
    out.variance = checked_variance(mean, "corpus spectrum");
    out.e_mean = mean / out.variance;
    for (const auto& d : doc_means) scaled.push_back(d / out.variance);
  } else {
    double variance_sum = 0.0;
    for (const auto& d : doc_means) {
      const double v = checked_variance(d, "document spectrum");
      variance_sum += v;
      scaled.push_back(d / v);
    }
    out.variance = variance_sum / count;
    out.e_mean = Eigen::VectorXd::Zero(bins);
    for (const auto& s : scaled) out.e_mean += s;
    out.e_mean /= count;
  }

  Eigen::VectorXd ss = Eigen::VectorXd::Zero(bins);
  for (const auto& s : scaled) ss += (s - out.e_mean).cwiseAbs2();
  out.e_std = (ss / count).cwiseSqrt();
  return out;
}

}  // namespace embspec
