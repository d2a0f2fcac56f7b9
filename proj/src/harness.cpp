#include "rcar/harness.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "rcar/parallel.hpp"
#include "rcar/stats.hpp"

namespace rcar {

namespace {

constexpr double kNormalityZ = 4.0;
constexpr double kStabilityTolerance = 0.2;
constexpr double kStationarityFlagZ = 5.0;

std::uint64_t replication_seed(std::uint64_t seed, std::size_t grid_index, std::size_t rep) {
  return derive_key(seed, {static_cast<std::uint64_t>(StreamPurpose::replication),
                           static_cast<std::uint64_t>(grid_index),
                           static_cast<std::uint64_t>(rep)});
}

void require_stationary_model(const ExperimentPlan& plan, const char* what) {
  const auto verdict = is_second_order_stationary(plan.spec.coefficients, kDefaultBoundaryTol,
                                                  plan.sampling);
  if (!verdict.stationary) {
    throw NonstationaryError(std::string(what) +
                             ": the model is not second-order stationary; the limit theorems "
                             "require every coefficient draw to have eigenvalues inside the "
                             "unit circle");
  }
}

ExpectationMode target_mode(const ExperimentPlan& plan) {
  return plan.spec.coefficients.is_gaussian() ? ExpectationMode::sample(plan.sampling)
                                              : ExpectationMode::exact();
}

ModelSpec with_grid_value(const ExperimentPlan& plan, int value) {
  ModelSpec spec = plan.spec;
  (plan.sweep == SweepVariable::N ? spec.N : spec.T) = value;
  spec.validate();
  return spec;
}

/// Simulated Upsilon-hat(u) for every replication: [rep][lag index].
std::vector<std::vector<MatrixXd>> replicate_upsilon(const ExperimentPlan& plan,
                                                     const ModelSpec& spec,
                                                     std::size_t grid_index,
                                                     const std::vector<int>& lags) {
  std::vector<std::vector<MatrixXd>> out(plan.replications);
  parallel_for(static_cast<std::size_t>(plan.replications), plan.threads, [&](std::size_t r) {
    const Panel panel = simulate_panel(spec, replication_seed(plan.seed, grid_index, r),
                                       plan.init, false, plan.draw, 1);
    for (int u : lags) out[r].push_back(upsilon_hat(panel, u).value);
  });
  return out;
}

Check band_check(std::string name, double value, double lower, double upper,
                 std::string detail = {}) {
  return {std::move(name), value >= lower && value <= upper, value, lower, upper,
          std::move(detail)};
}

void fit_slopes(ExperimentResult& result, const std::vector<int>& lags) {
  for (std::size_t k = 0; k < lags.size(); ++k) {
    std::vector<double> x, y, se;
    for (const auto& point : result.points) {
      for (const auto& lag : point.lags) {
        if (lag.lag != lags[k] || !(lag.aggregate_rmse > 0.0)) continue;
        x.push_back(std::log(static_cast<double>(point.value)));
        y.push_back(std::log(lag.aggregate_rmse));
        se.push_back(lag.aggregate_rmse_se / lag.aggregate_rmse);
      }
    }
    if (x.size() < 2) continue;
    const auto fit = stats::fit_line(x, y, se);
    result.slopes.push_back({lags[k], fit.slope, fit.slope_se, fit.slope - 1.96 * fit.slope_se,
                             fit.slope + 1.96 * fit.slope_se});
  }
}

}  // namespace

std::string statistic_name(Statistic s) {
  switch (s) {
    case Statistic::bias: return "bias";
    case Statistic::rmse: return "rmse";
    case Statistic::slope: return "slope";
    case Statistic::normality: return "normality";
  }
  return "?";
}

std::string sweep_name(SweepVariable s) { return s == SweepVariable::N ? "N" : "T"; }

void ExperimentPlan::validate() const {
  if (grid.empty()) throw InvalidArgument("experiment plan: grid is empty");
  for (std::size_t i = 1; i < grid.size(); ++i) {
    if (grid[i] <= grid[i - 1]) {
      throw InvalidArgument("experiment plan: grid must be strictly increasing");
    }
  }
  if (grid.front() < 1) throw InvalidArgument("experiment plan: grid values must be >= 1");
  if (replications < 2) throw InvalidArgument("experiment plan: need at least 2 replications");
  if (statistics.count(Statistic::normality) && replications < 50) {
    throw InvalidArgument("experiment plan: normality statistics need R >= 50 replications, got " +
                          std::to_string(replications));
  }
  for (int u : lags) {
    if (u < 0) throw InvalidArgument("experiment plan: lags must be >= 0");
  }
  rcar::validate(init);
}

bool ExperimentResult::passed() const {
  return std::all_of(checks.begin(), checks.end(), [](const Check& c) { return c.passed; });
}

ExperimentResult run_consistency(const ExperimentPlan& plan) {
  plan.validate();
  if (plan.sweep != SweepVariable::N) {
    throw InvalidArgument("run_consistency: the plan must sweep N");
  }
  require_stationary_model(plan, "run_consistency");
  const int max_lag = *std::max_element(plan.lags.begin(), plan.lags.end());
  const CovarianceSet targets =
      unconditional_covariances(plan.spec.coefficients, plan.spec.mean_omega(), max_lag,
                                plan.series, target_mode(plan));

  ExperimentResult result;
  result.kind = "consistency";
  std::vector<int> active;
  for (std::size_t g = 0; g < plan.grid.size(); ++g) {
    const ModelSpec spec = with_grid_value(plan, plan.grid[g]);
    GridPoint point;
    point.value = plan.grid[g];
    point.replications = static_cast<std::size_t>(plan.replications);
    Panel probe;
    probe.T = spec.T;
    probe.p = spec.p;
    active.clear();
    for (int u : plan.lags) {
      (u <= max_estimable_lag(probe) ? active : point.skipped_lags).push_back(u);
    }
    const auto samples = replicate_upsilon(plan, spec, g, active);
    const double reps = static_cast<double>(plan.replications);

    for (std::size_t k = 0; k < active.size(); ++k) {
      LagStatistics lag;
      lag.lag = active[k];
      lag.target = targets.at(active[k]);
      const Eigen::Index p = lag.target.rows();
      lag.bias = MatrixXd::Zero(p, p);
      MatrixXd second = MatrixXd::Zero(p, p);
      std::vector<double> frob(plan.replications);
      for (int r = 0; r < plan.replications; ++r) {
        const MatrixXd err = samples[r][k] - lag.target;
        lag.bias += err / reps;
        second += err.cwiseProduct(err) / reps;
        frob[r] = err.squaredNorm();
      }
      lag.rmse = second.cwiseSqrt();
      MatrixXd var = MatrixXd::Zero(p, p);
      for (int r = 0; r < plan.replications; ++r) {
        const MatrixXd d = samples[r][k] - lag.target - lag.bias;
        var += d.cwiseProduct(d) / (reps - 1.0);
      }
      lag.bias_se = (var / reps).cwiseSqrt();
      const auto fs = stats::summarize(frob);
      lag.aggregate_rmse = std::sqrt(fs.mean);
      lag.aggregate_rmse_se =
          lag.aggregate_rmse > 0.0 ? fs.standard_error() / (2.0 * lag.aggregate_rmse) : 0.0;
      point.lags.push_back(std::move(lag));
    }
    result.points.push_back(std::move(point));
  }

  std::vector<int> fitted = plan.lags;
  fit_slopes(result, fitted);

  for (int u : plan.lags) {
    const LagStatistics* first = nullptr;
    const LagStatistics* last = nullptr;
    for (const auto& point : result.points) {
      for (const auto& lag : point.lags) {
        if (lag.lag != u) continue;
        if (!first) first = &lag;
        last = &lag;
      }
    }
    if (!first) continue;
    const std::string suffix = "_lag" + std::to_string(u);
    if (plan.statistics.count(Statistic::rmse) && first != last) {
      result.checks.push_back(band_check("rmse_decreasing" + suffix,
                                         last->aggregate_rmse - first->aggregate_rmse,
                                         -std::numeric_limits<double>::infinity(), 0.0,
                                         "RMSE at the largest N minus RMSE at the smallest N"));
    }
    if (plan.statistics.count(Statistic::bias)) {
      double worst = 0.0;
      for (const auto& point : result.points) {
        for (const auto& lag : point.lags) {
          if (lag.lag != u) continue;
          for (Eigen::Index i = 0; i < lag.bias.size(); ++i) {
            const double se = lag.bias_se(i);
            const double z = se > 0.0 ? std::abs(lag.bias(i)) / se
                                       : (lag.bias(i) == 0.0 ? 0.0 : HUGE_VAL);
            worst = std::max(worst, z);
          }
        }
      }
      result.checks.push_back(band_check("bias" + suffix, worst, 0.0, kNormalityZ,
                                         "largest |bias| in standard errors"));
    }
  }
  if (plan.statistics.count(Statistic::slope)) {
    for (const auto& s : result.slopes) {
      std::ostringstream detail;
      detail << "log-log RMSE slope, SE " << s.slope_se;
      result.checks.push_back(band_check("slope_lag" + std::to_string(s.lag), s.slope,
                                         plan.slope_target - plan.slope_halfwidth,
                                         plan.slope_target + plan.slope_halfwidth, detail.str()));
    }
  }
  return result;
}

ExperimentResult run_clt(const ExperimentPlan& plan) {
  plan.validate();
  if (plan.replications < 50) {
    throw InvalidArgument("run_clt: normality statistics need R >= 50 replications, got " +
                          std::to_string(plan.replications));
  }
  if (plan.sweep != SweepVariable::N) throw InvalidArgument("run_clt: the plan must sweep N");
  require_stationary_model(plan, "run_clt");
  const int max_lag = *std::max_element(plan.lags.begin(), plan.lags.end());
  const CovarianceSet targets =
      unconditional_covariances(plan.spec.coefficients, plan.spec.mean_omega(), max_lag,
                                plan.series, target_mode(plan));

  ExperimentResult result;
  result.kind = "clt";
  const double skew_se = stats::skewness_standard_error(plan.replications);
  const double kurt_se = stats::kurtosis_standard_error(plan.replications);

  for (std::size_t g = 0; g < plan.grid.size(); ++g) {
    const ModelSpec spec = with_grid_value(plan, plan.grid[g]);
    GridPoint point;
    point.value = plan.grid[g];
    point.replications = static_cast<std::size_t>(plan.replications);
    Panel probe;
    probe.T = spec.T;
    probe.p = spec.p;
    std::vector<int> active;
    for (int u : plan.lags) {
      (u <= max_estimable_lag(probe) ? active : point.skipped_lags).push_back(u);
    }
    if (active.empty()) {
      result.points.push_back(std::move(point));
      continue;
    }
    const auto samples = replicate_upsilon(plan, spec, g, active);
    const Eigen::Index q = spec.p * spec.p;
    const Eigen::Index dim = q * static_cast<Eigen::Index>(active.size());
    const double root_n = std::sqrt(static_cast<double>(spec.N));

    MatrixXd z(plan.replications, dim);
    for (int r = 0; r < plan.replications; ++r) {
      for (std::size_t k = 0; k < active.size(); ++k) {
        z.row(r).segment(static_cast<Eigen::Index>(k) * q, q) =
            (root_n * vec(MatrixXd(samples[r][k] - targets.at(active[k])))).transpose();
      }
    }

    for (Eigen::Index c = 0; c < dim; ++c) {
      const VectorXd column = z.col(c);
      const std::span<const double> xs(column.data(), static_cast<std::size_t>(column.size()));
      const auto s = stats::summarize(xs);
      NormalityDiagnostic d;
      d.coordinate = "u=" + std::to_string(active[c / q]) + " vec[" + std::to_string(c % q) + "]";
      d.replications = s.n;
      d.mean = s.mean;
      d.mean_se = s.standard_error();
      d.skewness = s.skewness;
      d.skewness_se = skew_se;
      d.excess_kurtosis = s.excess_kurtosis;
      d.kurtosis_se = kurt_se;
      d.ks_scaled = std::sqrt(static_cast<double>(s.n)) * stats::ks_distance_studentized(xs);
      d.passed = s.variance > 0.0 && std::abs(d.skewness) < kNormalityZ * skew_se &&
                 std::abs(d.excess_kurtosis) < kNormalityZ * kurt_se &&
                 d.ks_scaled < stats::kKolmogorovCritical1Pct;
      point.normality.push_back(std::move(d));
    }

    const MatrixXd centered = z.rowwise() - z.colwise().mean();
    point.limiting_covariance =
        MatrixXd(centered.transpose() * centered / (plan.replications - 1.0));
    result.points.push_back(std::move(point));
  }

  // Screens are asserted at the largest N; smaller N are reported only.
  const GridPoint& last = result.points.back();
  if (!last.normality.empty()) {
    double worst_mean = 0.0;
    std::size_t failing = 0;
    for (const auto& d : last.normality) {
      if (!d.passed) ++failing;
      worst_mean = std::max(worst_mean, d.mean_se > 0.0 ? std::abs(d.mean) / d.mean_se : 0.0);
    }
    result.checks.push_back(band_check("normality_N" + std::to_string(last.value),
                                       static_cast<double>(failing), 0.0, 0.0,
                                       "coordinates failing the skewness/kurtosis/KS screen"));
    result.checks.push_back(band_check("zero_mean_N" + std::to_string(last.value), worst_mean,
                                       0.0, kNormalityZ, "largest |mean| in standard errors"));
  }
  if (result.points.size() >= 2) {
    const auto& a = result.points[result.points.size() - 2].limiting_covariance;
    const auto& b = result.points.back().limiting_covariance;
    if (a && b && a->size() == b->size() && b->norm() > 0.0) {
      result.covariance_relative_change = (*b - *a).norm() / b->norm();
      result.checks.push_back(band_check("covariance_stability",
                                         *result.covariance_relative_change, 0.0,
                                         kStabilityTolerance,
                                         "relative Frobenius change of the sqrt(N) error "
                                         "covariance between the two largest N"));
    }
  }
  return result;
}

ExperimentResult run_ahat_convergence(const ExperimentPlan& plan) {
  plan.validate();
  if (plan.sweep != SweepVariable::T) {
    throw InvalidArgument("run_ahat_convergence: the plan must sweep T");
  }
  const int p = plan.spec.p;
  InitMode init = plan.init;
  if (plan.noiseless) {
    auto* b = std::get_if<BurnIn>(&init);
    if (!b) init = BurnIn{0, std::nullopt}, b = std::get_if<BurnIn>(&init);
    if (!b->initial_state) {
      VectorXd start = VectorXd::Zero(p);
      start(0) = 1.0;
      b->initial_state = start;
    }
  }

  // One coefficient draw shared by every cell, so the T sweep isolates the
  // estimation error.
  auto coefficient_stream = individual_streams(plan.seed, 0).coefficients;
  const IndividualDraw draw = draw_individual(plan.spec, coefficient_stream, plan.draw);
  const double sigma2 = plan.noiseless ? 0.0 : draw.sigma2;

  ExperimentResult result;
  result.kind = "ahat_convergence";
  for (std::size_t g = 0; g < plan.grid.size(); ++g) {
    const ModelSpec spec = with_grid_value(plan, plan.grid[g]);
    std::vector<double> errors(plan.replications);
    parallel_for(static_cast<std::size_t>(plan.replications), plan.threads, [&](std::size_t r) {
      auto streams = individual_streams(replication_seed(plan.seed, g, r), 1);
      const VectorXd path = simulate_path(draw.coeffs, sigma2, spec.T, init, streams.innovations);
      const IndividualFit fit = a_hat_individual(path, p);
      errors[r] = (fit.a_hat.matrix() - companion_matrix(draw.coeffs.alpha())).norm();
    });
    const auto s = stats::summarize(errors);
    GridPoint point;
    point.value = plan.grid[g];
    point.replications = s.n;
    point.mean_error = s.mean;
    point.mean_error_se = s.standard_error();
    point.max_error = *std::max_element(errors.begin(), errors.end());
    result.points.push_back(std::move(point));
  }

  if (plan.noiseless) {
    double worst = 0.0;
    for (const auto& point : result.points) worst = std::max(worst, point.max_error);
    result.checks.push_back(band_check("noiseless_exact_recovery", worst, 0.0, 1e-10,
                                       "largest ||A-hat - A|| over all cells"));
    return result;
  }

  std::vector<double> x, y, se;
  for (const auto& point : result.points) {
    x.push_back(std::log(static_cast<double>(point.value)));
    y.push_back(std::log(point.mean_error));
    se.push_back(point.mean_error_se / point.mean_error);
  }
  if (x.size() >= 2) {
    const auto fit = stats::fit_line(x, y, se);
    result.slopes.push_back({0, fit.slope, fit.slope_se, fit.slope - 1.96 * fit.slope_se,
                             fit.slope + 1.96 * fit.slope_se});
    if (plan.statistics.count(Statistic::slope)) {
      std::ostringstream detail;
      detail << "log-log slope of mean ||A-hat - A||, SE " << fit.slope_se;
      result.checks.push_back(band_check("ahat_slope", fit.slope,
                                         plan.slope_target - plan.slope_halfwidth,
                                         plan.slope_target + plan.slope_halfwidth, detail.str()));
    }
  }
  return result;
}

StationarityDiagnostic run_stationarity_diagnostic(const Panel& panel) {
  panel.validate();
  const int p = panel.p;
  if (panel.T < p) throw InvalidArgument("stationarity diagnostic: need T >= p");
  StationarityDiagnostic out;
  out.N = panel.N;
  if (panel.N < 200) {
    out.warnings.push_back("N = " + std::to_string(panel.N) +
                           " is below 200; the difference statistics are unreliable");
  }
  const double n = static_cast<double>(panel.N);
  out.mean0 = VectorXd::Zero(p);
  out.mean1 = VectorXd::Zero(p);
  out.second0 = MatrixXd::Zero(p, p);
  out.second1 = MatrixXd::Zero(p, p);

  // Per-individual differences of each first and second moment coordinate.
  const int coords = p + p * (p + 1) / 2;
  MatrixXd diffs(panel.N, coords);
  for (int omega = 1; omega <= panel.N; ++omega) {
    const VectorXd y = panel.series(omega);
    const VectorXd s0 = y.segment(0, p);
    const VectorXd s1 = y.segment(1, p);
    out.mean0 += s0 / n;
    out.mean1 += s1 / n;
    out.second0 += s0 * s0.transpose() / n;
    out.second1 += s1 * s1.transpose() / n;
    int c = 0;
    for (int i = 0; i < p; ++i) diffs(omega - 1, c++) = s1(i) - s0(i);
    for (int i = 0; i < p; ++i) {
      for (int j = i; j < p; ++j) diffs(omega - 1, c++) = s1(i) * s1(j) - s0(i) * s0(j);
    }
  }
  for (int c = 0; c < coords; ++c) {
    const VectorXd column = diffs.col(c);
    const auto s = stats::summarize(
        std::span<const double>(column.data(), static_cast<std::size_t>(column.size())));
    const double se = s.standard_error();
    const double z = se > 0.0 ? std::abs(s.mean) / se : (s.mean == 0.0 ? 0.0 : HUGE_VAL);
    out.max_z = std::max(out.max_z, z);
  }
  out.flagged = out.max_z > kStationarityFlagZ;
  return out;
}

}  // namespace rcar
