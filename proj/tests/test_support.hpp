#pragma once

#include <complex>
#include <cstdint>
#include <vector>

#include "rcar/model.hpp"
#include "rcar/random.hpp"

namespace rcar::testing {

/// Coefficients whose characteristic roots are drawn inside the disc of
/// radius `max_modulus`, by expanding prod (z - r_k) directly.
inline CoefficientVector random_stationary_coeffs(NormalStream& s, int p,
                                                  double max_modulus = 0.95) {
  std::vector<std::complex<double>> roots;
  while (static_cast<int>(roots.size()) < p) {
    const double radius = max_modulus * std::sqrt(s.uniform());
    if (p - static_cast<int>(roots.size()) >= 2 && s.uniform() < 0.5) {
      const double angle = 3.141592653589793 * s.uniform();
      const std::complex<double> r = std::polar(radius, angle);
      roots.push_back(r);
      roots.push_back(std::conj(r));
    } else {
      roots.emplace_back(s.uniform() < 0.5 ? -radius : radius, 0.0);
    }
  }
  // c(z) = z^p + c_1 z^{p-1} + ... + c_p
  std::vector<std::complex<double>> c{1.0};
  for (const auto& r : roots) {
    std::vector<std::complex<double>> next(c.size() + 1, 0.0);
    for (std::size_t k = 0; k < c.size(); ++k) {
      next[k] += c[k];
      next[k + 1] -= r * c[k];
    }
    c = next;
  }
  VectorXd alpha(p);
  for (int k = 1; k <= p; ++k) alpha(k - 1) = -c[k].real();
  return CoefficientVector(alpha);
}

inline NormalStream test_stream(std::uint64_t seed) {
  return NormalStream(make_stream(seed, {0xC0FFEE}));
}

}  // namespace rcar::testing
