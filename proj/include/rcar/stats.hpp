#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace rcar::stats {

/// Asymptotic 1% critical value of the Kolmogorov statistic sqrt(n) D.
inline constexpr double kKolmogorovCritical1Pct = 1.6276;

struct Summary {
  std::size_t n = 0;
  double mean = 0.0;
  double variance = 0.0;         // unbiased
  double skewness = 0.0;         // m3 / m2^{3/2}
  double excess_kurtosis = 0.0;  // m4 / m2^2 - 3
  double fourth_central = 0.0;   // m4 (biased)

  double sd() const;
  double standard_error() const;  // sd / sqrt(n)
  /// Standard error of the sample variance, sqrt((m4 - s^4) / n).
  double variance_standard_error() const;
};

Summary summarize(std::span<const double> x);

/// Exact standard errors of skewness / excess kurtosis for a normal sample.
double skewness_standard_error(std::size_t n);
double kurtosis_standard_error(std::size_t n);

double normal_cdf(double x);

/// max |F_n(x) - Phi(x)| after studentizing by the sample mean and sd.
double ks_distance_studentized(std::span<const double> x);

struct LineFit {
  double slope = 0.0;
  double intercept = 0.0;
  double slope_se = 0.0;  // from the per-point standard errors of y
  std::size_t points = 0;
};

/// Ordinary least squares of y on x; slope_se propagates y_se through the
/// fixed-design OLS weights.
LineFit fit_line(std::span<const double> x, std::span<const double> y,
                 std::span<const double> y_se);

}  // namespace rcar::stats
