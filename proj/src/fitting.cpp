#include "embspec/fitting.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>
#include <sstream>

#include "embspec/error.hpp"

namespace embspec {

void FitWindow::validate() const {
  if (!(lo > 0.0 && lo < hi && hi <= 1.0)) {
    std::ostringstream msg;
    msg << "invalid fit window [" << lo << ", " << hi << "]: need 0 < lo < hi <= 1";
    throw UsageError(msg.str());
  }
}

Regression ordinary_least_squares(const Eigen::Ref<const Eigen::VectorXd>& x,
                                  const Eigen::Ref<const Eigen::VectorXd>& y) {
  const Eigen::Index n = x.size();
  Regression r;
  if (n == 0 || y.size() != n) throw ValidationError("regression needs equal-length, non-empty inputs");

  const bool flat_y = y.maxCoeff() == y.minCoeff();
  const double x_mean = x.mean();
  const double y_mean = y.mean();
  const Eigen::ArrayXd dx = x.array() - x_mean;
  const Eigen::ArrayXd dy = y.array() - y_mean;
  const double sxx = (dx * dx).sum();

  if (flat_y || !(sxx > 0.0)) {
    r.degenerate = true;
    r.slope = 0.0;
    r.intercept = flat_y ? y(0) : y_mean;
    if (!flat_y && n > 1) r.slope_stderr = std::numeric_limits<double>::infinity();
    return r;
  }

  const double syy = (dy * dy).sum();
  r.slope = (dx * dy).sum() / sxx;
  r.intercept = y_mean - r.slope * x_mean;
  const Eigen::ArrayXd resid = dy - r.slope * dx;
  const double ssr = (resid * resid).sum();
  r.slope_stderr = n > 2 ? std::sqrt(ssr / static_cast<double>(n - 2) / sxx) : 0.0;
  r.r2 = std::clamp(1.0 - ssr / syy, 0.0, 1.0);
  return r;
}

PowerLawFit fit_power_law(const Eigen::Ref<const Eigen::VectorXd>& bins,
                          const Eigen::Ref<const Eigen::VectorXd>& values, const FitWindow& window) {
  window.validate();
  if (bins.size() != values.size()) throw ValidationError("frequency and power vectors differ in length");

  std::vector<Eigen::Index> inside;
  std::vector<Eigen::Index> bad;
  for (Eigen::Index k = 0; k < bins.size(); ++k) {
    if (!window.contains(bins(k))) continue;
    inside.push_back(k);
    if (!(values(k) > 0.0) || !std::isfinite(values(k))) bad.push_back(k);
  }
  if (static_cast<Eigen::Index>(inside.size()) < kMinFitBins) {
    std::ostringstream msg;
    msg << "fit window [" << window.lo << ", " << window.hi << "] holds " << inside.size() << " bins; at least "
        << kMinFitBins << " are required";
    throw WindowError(msg.str());
  }
  if (!bad.empty()) {
    std::ostringstream msg;
    msg << "non-positive power in fit window at bin";
    msg << (bad.size() > 1 ? "s" : "");
    for (std::size_t i = 0; i < bad.size() && i < 20; ++i) msg << (i ? ", " : " ") << bad[i] + 1;
    if (bad.size() > 20) msg << ", ... (" << bad.size() << " total)";
    throw FitDomainError(msg.str());
  }

  const auto n = static_cast<Eigen::Index>(inside.size());
  Eigen::VectorXd x(n), y(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    x(i) = std::log10(bins(inside[static_cast<std::size_t>(i)]));
    y(i) = std::log10(values(inside[static_cast<std::size_t>(i)]));
  }
  const Regression reg = ordinary_least_squares(x, y);

  PowerLawFit fit;
  fit.alpha = reg.slope;
  fit.intercept = reg.intercept;
  fit.stderr_alpha = reg.slope_stderr;
  fit.r2 = reg.r2;
  fit.degenerate = reg.degenerate;
  fit.n_bins = n;
  fit.window = window;
  return fit;
}

bool within_relative_band(double alpha, long double ref, long double rel) {
  return std::fabs(static_cast<long double>(alpha) - ref) <= rel * std::fabs(ref);
}

bool within_kolmogorov_band(double alpha) {
  // 3*alpha needs at most 55 significant bits, so this is exact in x87 long double.
  return std::fabs(3.0L * static_cast<long double>(alpha) - 5.0L) <= 0.5L;
}

DimensionStats per_dimension_stats(const PowerSpectrum& spec, const FitWindow& window) {
  DimensionStats stats;
  stats.per_dim_alpha = Eigen::VectorXd::Constant(spec.dim(), std::numeric_limits<double>::quiet_NaN());
  std::vector<double> fitted;
  fitted.reserve(static_cast<std::size_t>(spec.dim()));
  for (Eigen::Index j = 0; j < spec.dim(); ++j) {
    try {
      const double a = fit_power_law(spec.f_norm, spec.power.col(j), window).alpha;
      stats.per_dim_alpha(j) = a;
      fitted.push_back(a);
    } catch (const FitDomainError&) {
      ++stats.excluded_dims;
    }
  }
  if (fitted.empty()) throw FitDomainError("no dimension has positive power throughout the fit window");

  const auto count = static_cast<double>(fitted.size());
  double sum = 0.0;
  std::size_t within = 0;
  for (double a : fitted) {
    sum += a;
    if (within_kolmogorov_band(a)) ++within;
  }
  stats.alpha_mean = sum / count;
  double ss = 0.0;
  for (double a : fitted) ss += (a - stats.alpha_mean) * (a - stats.alpha_mean);
  stats.alpha_std = std::sqrt(ss / count);
  stats.frac_within_10pct = static_cast<double>(within) / count;
  return stats;
}

std::vector<unsigned> numeric_layers(const Manifest& manifest) {
  std::set<unsigned> layers;
  for (const auto& e : manifest.entries)
    if (!e.meta.layer.is_static()) layers.insert(*e.meta.layer.index);
  return {layers.begin(), layers.end()};
}

LayerSweep layer_sweep(const Manifest& manifest, const DocumentFilter& filter, const FitWindow& window,
                       NormMode mode, const CorpusOptions& options) {
  window.validate();
  const std::vector<unsigned> layers = numeric_layers(manifest);
  if (layers.size() < 2)
    throw UsageError("layer sweep needs at least 2 numeric layers, manifest has " + std::to_string(layers.size()));

  LayerSweep sweep;
  for (unsigned layer : layers) {
    const auto in_layer = [&](const DocumentMeta& m) { return m.layer == LayerId::at(layer) && filter(m); };
    const bool any = std::any_of(manifest.entries.begin(), manifest.entries.end(),
                                 [&](const ManifestEntry& e) { return in_layer(e.meta); });
    if (!any) {
      sweep.warnings.push_back("layer " + std::to_string(layer) + ": no documents in group, skipped");
      continue;
    }
    CorpusAccumulation acc = accumulate_corpus(manifest, in_layer, options);
    const NormalizedSpectrum spec = corpus_spectrum(acc, mode);
    sweep.points.push_back({layer, fit_power_law(spec.f_norm, spec.e_mean, window), acc.doc_count()});
    sweep.skipped.insert(sweep.skipped.end(), acc.skipped.begin(), acc.skipped.end());
  }
  return sweep;
}

}  // namespace embspec
