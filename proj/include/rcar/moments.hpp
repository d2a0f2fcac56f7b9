#pragma once

#include <map>
#include <string>
#include <utility>
#include <vector>

#include "rcar/covariance.hpp"
#include "rcar/model.hpp"

namespace rcar {

enum class CovarianceKind { conditional, unconditional };

/// Lag-indexed p x p covariances, lags 0..max_lag().
struct CovarianceSet {
  CovarianceKind kind = CovarianceKind::conditional;
  std::vector<MatrixXd> lags;
  std::size_t truncation_order = 0;  // 0 for closed-form sets
  double tail_bound = 0.0;

  int max_lag() const noexcept { return static_cast<int>(lags.size()) - 1; }
  const MatrixXd& at(int u) const { return lags.at(static_cast<std::size_t>(u)); }
};

/// Conditional covariances Gamma(0..max_lag) of a single coefficient draw.
CovarianceSet conditional_covariances(const CompanionMatrix& a, const MatrixXd& omega,
                                      int max_lag,
                                      double boundary_tol = kDefaultBoundaryTol);

/// mu(v, u) = E{A^v (x) A^{v+u}}, a p^2 x p^2 matrix; mu(0, 0) = I.
MatrixXd moment_mu(const CoefficientDistribution& dist, int v, int u,
                   const ExpectationMode& mode = ExpectationMode::exact());

struct MomentSeries {
  int p = 0;
  int max_v = 0;
  int max_u = 0;
  std::map<std::pair<int, int>, MatrixXd> entries;  // (v, u) -> mu(v, u)
  double tail_bound = 0.0;  // geometric estimate of sum_{v > max_v} |mu(v, 0)|

  const MatrixXd& at(int v, int u) const { return entries.at({v, u}); }
};

MomentSeries moment_series(const CoefficientDistribution& dist, int max_v, int max_u,
                           const ExpectationMode& mode = ExpectationMode::exact());

/// Unconditional lag-u covariance sum_v unvec(mu(v, u) vec(OmegaBar)).
/// OmegaBar is the mean innovation covariance E{Omega}. Throws
/// NonstationaryError unless the distribution is second-order stationary and
/// every atom is itself stationary (otherwise the series diverges).
SeriesResult<double> upsilon_series(const CoefficientDistribution& dist,
                                    const MatrixXd& omega_bar, int u,
                                    const SeriesOptions& options = {},
                                    const ExpectationMode& mode = ExpectationMode::exact());

CovarianceSet unconditional_covariances(const CoefficientDistribution& dist,
                                        const MatrixXd& omega_bar, int max_lag,
                                        const SeriesOptions& options = {},
                                        const ExpectationMode& mode = ExpectationMode::exact());

struct SpectralDensityValue {
  double lambda = 0.0;
  MatrixXcd value;
  std::size_t truncation_order = 0;
  double tail_bound = 0.0;
};

/// (1/2pi) [Y(0) + sum_{u>=1} (Y(u) e^{-i lambda u} + Y(u)' e^{i lambda u})],
/// truncated once the lag-u contribution drops below tol.
SpectralDensityValue spectral_density(const CoefficientDistribution& dist,
                                      const MatrixXd& omega_bar, double lambda,
                                      const SeriesOptions& options = {},
                                      const ExpectationMode& mode = ExpectationMode::exact());

/// How the zero-frequency moment form takes expectations.
enum class MomentFactorization {
  /// E{[I + sum_u (I (x) A^u + A^u (x) I)] sum_v (A (x) A)^v} vec(OmegaBar):
  /// equals the lag-sum definition for every p.
  joint,
  /// [I + sum_u (mu_u + mu'_u)] sum_v mu_{2v} vec(OmegaBar) with each
  /// expectation taken separately; agrees with `joint` only for degenerate
  /// distributions.
  factorized,
};

/// S(0) through moment series in Kronecker form, independent of the lag-sum
/// route in spectral_density().
SpectralDensityValue spectral_density_zero_moment_form(
    const CoefficientDistribution& dist, const MatrixXd& omega_bar,
    const SeriesOptions& options = {},
    const ExpectationMode& mode = ExpectationMode::exact(),
    MomentFactorization factorization = MomentFactorization::joint);

struct SpectralExistence {
  bool exists = false;
  double worst_radius = 0.0;  // largest atom spectral radius seen
  double violating_mass = 0.0;
  std::string diagnostic;
  explicit operator bool() const noexcept { return exists; }
};

/// Every atom (or sampled draw) has spectral radius < 1 - tol, which makes
/// [I - I (x) A]^2 invertible. Gaussian laws are sampled without rejection so
/// the violating probability mass is reported.
SpectralExistence spectral_existence_check(const CoefficientDistribution& dist,
                                           double tol = kDefaultBoundaryTol,
                                           const SamplingOptions& sampling = {});

}  // namespace rcar
