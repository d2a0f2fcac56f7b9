#include "rcar/stats.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "rcar/error.hpp"

namespace rcar::stats {

double Summary::sd() const { return std::sqrt(variance); }

double Summary::standard_error() const {
  return n ? sd() / std::sqrt(static_cast<double>(n)) : 0.0;
}

double Summary::variance_standard_error() const {
  if (n == 0) return 0.0;
  const double m2 = variance * (static_cast<double>(n) - 1.0) / static_cast<double>(n);
  return std::sqrt(std::max(0.0, fourth_central - m2 * m2) / static_cast<double>(n));
}

Summary summarize(std::span<const double> x) {
  Summary s;
  s.n = x.size();
  if (s.n == 0) return s;
  double sum = 0.0;
  for (double v : x) sum += v;
  s.mean = sum / static_cast<double>(s.n);
  double m2 = 0.0, m3 = 0.0, m4 = 0.0;
  for (double v : x) {
    const double d = v - s.mean;
    const double d2 = d * d;
    m2 += d2;
    m3 += d2 * d;
    m4 += d2 * d2;
  }
  const double n = static_cast<double>(s.n);
  m2 /= n;
  m3 /= n;
  m4 /= n;
  s.variance = s.n > 1 ? m2 * n / (n - 1.0) : 0.0;
  s.fourth_central = m4;
  if (m2 > 0.0) {
    s.skewness = m3 / std::pow(m2, 1.5);
    s.excess_kurtosis = m4 / (m2 * m2) - 3.0;
  }
  return s;
}

double skewness_standard_error(std::size_t n) {
  const double r = static_cast<double>(n);
  return std::sqrt(6.0 * (r - 2.0) / ((r + 1.0) * (r + 3.0)));
}

double kurtosis_standard_error(std::size_t n) {
  const double r = static_cast<double>(n);
  return std::sqrt(24.0 * r * (r - 2.0) * (r - 3.0) /
                   ((r + 1.0) * (r + 1.0) * (r + 3.0) * (r + 5.0)));
}

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

double ks_distance_studentized(std::span<const double> x) {
  const Summary s = summarize(x);
  if (s.n == 0 || !(s.variance > 0.0)) return 1.0;
  std::vector<double> z(x.begin(), x.end());
  for (double& v : z) v = (v - s.mean) / s.sd();
  std::sort(z.begin(), z.end());
  const double n = static_cast<double>(z.size());
  double d = 0.0;
  for (std::size_t i = 0; i < z.size(); ++i) {
    const double f = normal_cdf(z[i]);
    d = std::max({d, static_cast<double>(i + 1) / n - f, f - static_cast<double>(i) / n});
  }
  return d;
}

LineFit fit_line(std::span<const double> x, std::span<const double> y,
                 std::span<const double> y_se) {
  if (x.size() != y.size() || x.size() != y_se.size() || x.size() < 2) {
    throw InvalidArgument("fit_line: need at least two points of matching length");
  }
  const double n = static_cast<double>(x.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  if (!(sxx > 0.0)) throw InvalidArgument("fit_line: x values must not all coincide");
  LineFit fit;
  fit.points = x.size();
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  double var = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double w = (x[i] - mx) / sxx;
    var += w * w * y_se[i] * y_se[i];
  }
  fit.slope_se = std::sqrt(var);
  return fit;
}

}  // namespace rcar::stats
