#pragma once

#include <string>
#include <vector>

#include <Eigen/Core>

#include "embspec/corpus.hpp"
#include "embspec/spectral.hpp"

namespace embspec {

/// Kolmogorov reference exponent, kept as the exact rational in the widest float type.
inline constexpr long double kFiveThirds = 5.0L / 3.0L;

inline constexpr Eigen::Index kMinFitBins = 8;

/// Inclusive window [lo, hi] on the normalized frequency f/f_max.
struct FitWindow {
  double lo = 0.02;
  double hi = 0.2;

  /// Throws UsageError unless 0 < lo < hi <= 1.
  void validate() const;
  bool contains(double f) const { return lo <= f && f <= hi; }
};

/// Ordinary least squares y = intercept + slope * x.
struct Regression {
  double slope = 0.0;
  double intercept = 0.0;
  double slope_stderr = 0.0;
  double r2 = 0.0;
  bool degenerate = false;  // zero variance in x or y; r2 reported as 0
};

Regression ordinary_least_squares(const Eigen::Ref<const Eigen::VectorXd>& x,
                                  const Eigen::Ref<const Eigen::VectorXd>& y);

struct PowerLawFit {
  double alpha = 0.0;  // log-log slope
  double intercept = 0.0;  // base-10
  double stderr_alpha = 0.0;
  double r2 = 0.0;
  Eigen::Index n_bins = 0;
  FitWindow window;
  bool degenerate = false;
};

/// OLS of log10(values) on log10(bins) over the bins inside `window`.
/// Throws WindowError with fewer than 8 bins, FitDomainError when a value in
/// the window is not strictly positive.
PowerLawFit fit_power_law(const Eigen::Ref<const Eigen::VectorXd>& bins,
                          const Eigen::Ref<const Eigen::VectorXd>& values, const FitWindow& window);

/// |alpha - ref| <= rel * ref, closed at the boundary.
bool within_relative_band(double alpha, long double ref, long double rel);

/// |alpha - 5/3| <= (5/3)/10, evaluated exactly as |3 alpha - 5| <= 1/2.
bool within_kolmogorov_band(double alpha);

struct DimensionStats {
  Eigen::VectorXd per_dim_alpha;  // NaN where the dimension was excluded
  double frac_within_10pct = 0.0;
  double alpha_mean = 0.0;
  double alpha_std = 0.0;  // population std over fitted dimensions
  Eigen::Index excluded_dims = 0;
};

/// Fits every column of a corpus-averaged spectrum. Columns that violate the
/// fit domain are excluded and counted; if none remain, FitDomainError.
DimensionStats per_dimension_stats(const PowerSpectrum& spec, const FitWindow& window);

struct LayerPoint {
  unsigned layer = 0;
  PowerLawFit fit;
  Eigen::Index doc_count = 0;
};

struct LayerSweep {
  std::vector<LayerPoint> points;  // ascending layer
  std::vector<std::string> warnings;
  std::vector<SkippedDocument> skipped;
};

/// Distinct numeric layers in the manifest, ascending.
std::vector<unsigned> numeric_layers(const Manifest& manifest);

/// Corpus spectrum and fit for each numeric layer of the manifest, restricted
/// to documents accepted by `filter`. Layers with no documents in the group
/// are skipped with a warning. Throws UsageError if the manifest has fewer
/// than two numeric layers.
LayerSweep layer_sweep(const Manifest& manifest, const DocumentFilter& filter, const FitWindow& window,
                       NormMode mode = NormMode::Corpus, const CorpusOptions& options = {});

}  // namespace embspec
