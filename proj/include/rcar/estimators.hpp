#pragma once

#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "rcar/moments.hpp"
#include "rcar/simulator.hpp"

namespace rcar {

/// State vectors (y_{t-p+1}, ..., y_t)' of one series for t = p-1..T, stored
/// as the columns of a p x (T - p + 2) matrix.
struct StateSeries {
  int p = 1;
  MatrixXd states;

  Eigen::Index size() const noexcept { return states.cols(); }
  /// Time index of column j.
  int time_of(Eigen::Index j) const noexcept { return p - 1 + static_cast<int>(j); }
};

StateSeries build_states(const Eigen::Ref<const VectorXd>& series, int p);

/// Largest lag for which at least one pair of states exists: T - p + 1.
int max_estimable_lag(const Panel& panel);

struct LagEstimate {
  MatrixXd value;
  std::size_t count;  // number of outer products summed (pairs x N)
};

/// Cross-sectional lag-u covariance: the mean of Y_t Y_{t-u}' over every
/// individual and every t with both states observed.
LagEstimate upsilon_hat(const Panel& panel, int u);

struct IndividualFit {
  CompanionMatrix a_hat;
  double sigma2_hat;
  double spectral_radius;
  double gram_condition;
  std::size_t count;  // regression pairs used
};

/// Least squares [sum Y_t Y_{t-1}'][sum Y_{t-1} Y_{t-1}']^{-1}, returned with
/// exact companion structure. Throws RankDeficiencyError when the lagged Gram
/// matrix is singular.
IndividualFit a_hat_individual(const Eigen::Ref<const VectorXd>& series, int p);

enum class Pathway { cross_sectional, per_individual };
std::string pathway_name(Pathway pathway);

struct EstimationReport {
  Pathway pathway = Pathway::cross_sectional;
  int N = 0;
  int T = 0;
  int p = 1;

  CovarianceSet upsilon_hat;           // unconditional kind, lags 0..U
  std::vector<std::size_t> lag_counts; // summand count per lag

  /// Covariance ratios: rho(u) * vec(Y(0)) = vec(Y(u)). Scalar (1 x 1) when
  /// p = 1; the minimum-norm p^2 x p^2 solution otherwise.
  std::map<int, MatrixXd> rho_hat;
  MatrixXd omega_hat;
  bool heuristic = false;  // p > 1 cross-sectional quantities

  std::optional<std::vector<IndividualFit>> fits;
  std::map<std::pair<int, int>, MatrixXd> moment_hat;  // (v, u) -> mean of A^v (x) A^{v+u}
  double nonstationary_fraction = 0.0;

  std::vector<std::string> warnings;
};

/// Upsilon-hat for lags 0..max_lag.
EstimationReport upsilon_tables(const Panel& panel, int max_lag);

/// Covariance ratios and Omega-hat = Y(0) - Y(2) (equal to [1 - rho(2)] Y(0)
/// for p = 1). Requires max_lag >= 2. Throws RankDeficiencyError when
/// Upsilon-hat(0) is near singular.
EstimationReport estimate_cross_sectional(const Panel& panel, int max_lag);

/// Per-individual least squares, empirical coefficient moments for all (v, u)
/// with v <= max_power and 2v + u <= 2 max_power + max_lag, and mean
/// per-individual noise covariance.
EstimationReport estimate_per_individual(const Panel& panel, int max_power, int max_lag);

}  // namespace rcar
