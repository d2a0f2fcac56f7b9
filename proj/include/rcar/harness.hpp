#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "rcar/estimators.hpp"
#include "rcar/moments.hpp"
#include "rcar/simulator.hpp"

namespace rcar {

enum class SweepVariable { N, T };
enum class Statistic { bias, rmse, slope, normality };

/// Replicated experiment around a model template. The swept dimension of
/// `spec` is overridden by each grid value.
struct ExperimentPlan {
  ModelSpec spec;
  SweepVariable sweep = SweepVariable::N;
  std::vector<int> grid;
  int replications = 200;
  std::vector<int> lags{0};
  std::uint64_t seed = 1;
  std::set<Statistic> statistics{Statistic::bias, Statistic::rmse, Statistic::slope};
  InitMode init = ExactStationary{};
  DrawOptions draw{};
  SeriesOptions series{};
  /// Used for targets of gaussian coefficient laws.
  SamplingOptions sampling{};
  /// Log-log slope acceptance band.
  double slope_target = -0.5;
  double slope_halfwidth = 0.15;
  /// Zero innovations (A-hat convergence only).
  bool noiseless = false;
  unsigned threads = 1;

  /// Throws InvalidArgument on an empty or non-increasing grid, or when
  /// normality statistics are requested with fewer than 50 replications.
  void validate() const;
};

struct Check {
  std::string name;
  bool passed = false;
  double value = 0.0;
  double lower = 0.0;
  double upper = 0.0;
  std::string detail;
};

struct LagStatistics {
  int lag = 0;
  MatrixXd target;
  MatrixXd bias;
  MatrixXd bias_se;
  MatrixXd rmse;
  double aggregate_rmse = 0.0;  // sqrt(E ||error||_F^2)
  double aggregate_rmse_se = 0.0;
};

struct NormalityDiagnostic {
  std::string coordinate;  // "u=<lag> vec[<k>]"
  std::size_t replications = 0;
  double mean = 0.0;
  double mean_se = 0.0;
  double skewness = 0.0;
  double skewness_se = 0.0;
  double excess_kurtosis = 0.0;
  double kurtosis_se = 0.0;
  double ks_scaled = 0.0;  // sqrt(R) * D
  bool passed = false;
};

struct GridPoint {
  int value = 0;
  std::size_t replications = 0;
  std::vector<LagStatistics> lags;
  std::vector<int> skipped_lags;
  std::vector<NormalityDiagnostic> normality;
  std::optional<MatrixXd> limiting_covariance;  // covariance of sqrt(N) vec errors
  // A-hat convergence
  double mean_error = 0.0;
  double mean_error_se = 0.0;
  double max_error = 0.0;
};

struct SlopeFit {
  int lag = 0;
  double slope = 0.0;
  double slope_se = 0.0;
  double ci_low = 0.0;
  double ci_high = 0.0;
};

struct ExperimentResult {
  std::string kind;
  std::vector<GridPoint> points;
  std::vector<SlopeFit> slopes;
  std::optional<double> covariance_relative_change;
  std::vector<Check> checks;

  bool passed() const;
};

/// RMSE of Upsilon-hat(u) against the series targets over an N grid, with a
/// log-log slope fit. Refuses nonstationary models.
ExperimentResult run_consistency(const ExperimentPlan& plan);

/// Normality screen of each coordinate of sqrt(N) vec(Upsilon-hat(u) - Upsilon(u)):
/// |skewness| < 4 SE, |excess kurtosis| < 4 SE and sqrt(R) D below the 1%
/// Kolmogorov value. The limiting covariance is estimated per grid point and
/// must change by less than 20% between the two largest N.
ExperimentResult run_clt(const ExperimentPlan& plan);

/// ||A-hat_T - A||_F over a T grid. One coefficient draw is fixed for the whole
/// experiment; replications redraw the innovations.
ExperimentResult run_ahat_convergence(const ExperimentPlan& plan);

struct StationarityDiagnostic {
  int N = 0;
  VectorXd mean0, mean1;
  MatrixXd second0, second1;  // cross-sectional E{Y Y'} at the first two state times
  double max_z = 0.0;         // largest |difference| / SE over means and second moments
  bool flagged = false;       // max_z > 5
  std::vector<std::string> warnings;
};

/// Compares the first two state times of a panel; an exactly stationary start
/// should not be flagged.
StationarityDiagnostic run_stationarity_diagnostic(const Panel& panel);

std::string statistic_name(Statistic s);
std::string sweep_name(SweepVariable s);

}  // namespace rcar
