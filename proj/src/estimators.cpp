#include "rcar/estimators.hpp"

#include <cmath>
#include <sstream>

namespace rcar {

StateSeries build_states(const Eigen::Ref<const VectorXd>& series, int p) {
  if (p < 1) throw InvalidArgument("build_states: p must be >= 1");
  const Eigen::Index n = series.size();
  if (n < p) {
    throw InvalidArgument("build_states: series of length " + std::to_string(n) +
                          " is shorter than p = " + std::to_string(p));
  }
  StateSeries out;
  out.p = p;
  out.states.resize(p, n - p + 1);
  for (Eigen::Index j = 0; j < out.states.cols(); ++j) {
    out.states.col(j) = series.segment(j, p);
  }
  return out;
}

int max_estimable_lag(const Panel& panel) { return panel.T - panel.p + 1; }

LagEstimate upsilon_hat(const Panel& panel, int u) {
  panel.validate();
  if (u < 0) throw InvalidArgument("upsilon_hat: lag must be >= 0");
  if (u > max_estimable_lag(panel)) {
    throw InvalidArgument("upsilon_hat: lag " + std::to_string(u) + " exceeds T - p + 1 = " +
                          std::to_string(max_estimable_lag(panel)));
  }
  const int p = panel.p;
  MatrixXd sum = MatrixXd::Zero(p, p);
  std::size_t count = 0;
  for (int omega = 1; omega <= panel.N; ++omega) {
    const StateSeries s = build_states(panel.series(omega), p);
    for (Eigen::Index j = u; j < s.size(); ++j) {
      sum.noalias() += s.states.col(j) * s.states.col(j - u).transpose();
      ++count;
    }
  }
  return {sum / static_cast<double>(count), count};
}

IndividualFit a_hat_individual(const Eigen::Ref<const VectorXd>& series, int p) {
  const StateSeries s = build_states(series, p);
  const Eigen::Index pairs = s.size() - 1;
  if (pairs < 1) throw InvalidArgument("a_hat_individual: need at least one regression pair");
  const auto lagged = s.states.leftCols(pairs);
  const VectorXd target = s.states.row(p - 1).tail(pairs).transpose();

  const MatrixXd gram = lagged * lagged.transpose();
  const VectorXd cross = lagged * target;
  Eigen::SelfAdjointEigenSolver<MatrixXd> eig(gram, Eigen::EigenvaluesOnly);
  const double largest = eig.eigenvalues().maxCoeff();
  const double smallest = eig.eigenvalues().minCoeff();
  if (!(largest > 0.0) || !(smallest > largest * 1e-12)) {
    throw RankDeficiencyError(
        "a_hat_individual: lagged Gram matrix is singular; some non-zero combination of "
        "the lagged states is exactly linearly determined");
  }
  const VectorXd bottom = gram.ldlt().solve(cross);
  const CoefficientVector coeffs(VectorXd(bottom.reverse()));
  CompanionMatrix a_hat(coeffs);

  const VectorXd residual = target - lagged.transpose() * bottom;
  const double dof = pairs > p ? static_cast<double>(pairs - p) : static_cast<double>(pairs);
  return {a_hat, residual.squaredNorm() / dof, spectral_radius(a_hat.matrix()),
          largest / smallest, static_cast<std::size_t>(pairs)};
}

std::string pathway_name(Pathway pathway) {
  return pathway == Pathway::cross_sectional ? "cross_sectional" : "per_individual";
}

EstimationReport upsilon_tables(const Panel& panel, int max_lag) {
  if (max_lag < 0) throw InvalidArgument("estimate: max_lag must be >= 0");
  EstimationReport report;
  report.N = panel.N;
  report.T = panel.T;
  report.p = panel.p;
  report.upsilon_hat.kind = CovarianceKind::unconditional;
  for (int u = 0; u <= max_lag; ++u) {
    LagEstimate est = upsilon_hat(panel, u);
    if (u == 0) est.value = (est.value + est.value.transpose()) / 2.0;
    report.upsilon_hat.lags.push_back(std::move(est.value));
    report.lag_counts.push_back(est.count);
  }
  return report;
}

EstimationReport estimate_cross_sectional(const Panel& panel, int max_lag) {
  if (max_lag < 2) throw InvalidArgument("estimate_cross_sectional: max_lag must be >= 2");
  EstimationReport report = upsilon_tables(panel, max_lag);
  report.pathway = Pathway::cross_sectional;
  const int p = panel.p;

  const MatrixXd& y0 = report.upsilon_hat.at(0);
  Eigen::JacobiSVD<MatrixXd> svd(y0);
  const auto& sv = svd.singularValues();
  if (!(sv(p - 1) > 0.0) || sv(0) / sv(p - 1) > kMaxCovarianceCondition) {
    throw RankDeficiencyError("estimate_cross_sectional: Upsilon-hat(0) is near singular");
  }

  const VectorXd base = vec(y0);
  for (int u = 1; u <= max_lag; ++u) {
    const VectorXd lagged = vec(report.upsilon_hat.at(u));
    report.rho_hat[u] = lagged * base.transpose() / base.squaredNorm();
  }
  report.omega_hat = y0 - report.upsilon_hat.at(2);
  report.heuristic = p > 1;
  if (report.heuristic) {
    report.warnings.push_back(
        "p > 1: covariance ratios are minimum-norm solutions and Omega-hat = Y(0) - Y(2) is "
        "heuristic; use the per-individual pathway for coefficient moments");
  }
  return report;
}

EstimationReport estimate_per_individual(const Panel& panel, int max_power, int max_lag) {
  if (max_power < 0 || max_lag < 0) {
    throw InvalidArgument("estimate_per_individual: bounds must be >= 0");
  }
  const int p = panel.p;
  EstimationReport report = upsilon_tables(panel, std::min(max_lag, max_estimable_lag(panel)));
  report.pathway = Pathway::per_individual;
  if (panel.T < 10 * p) {
    report.warnings.push_back("T = " + std::to_string(panel.T) + " is below 10p; per-individual "
                              "least squares may be unreliable");
  }

  std::vector<IndividualFit> fits;
  fits.reserve(panel.N);
  std::vector<int> failed;
  std::string first_failure;
  for (int omega = 1; omega <= panel.N; ++omega) {
    try {
      fits.push_back(a_hat_individual(panel.series(omega), p));
    } catch (const NumericalError& e) {
      if (failed.empty()) first_failure = e.what();
      failed.push_back(omega);
    }
  }
  if (!failed.empty()) {
    std::ostringstream out;
    out << "estimate_per_individual: fit failed for individuals";
    for (std::size_t i = 0; i < failed.size() && i < 20; ++i) out << ' ' << failed[i];
    if (failed.size() > 20) out << " ... (" << failed.size() << " total)";
    out << " (" << first_failure << ")";
    throw RankDeficiencyError(out.str());
  }

  const double n = static_cast<double>(fits.size());
  std::size_t explosive = 0;
  report.omega_hat = MatrixXd::Zero(p, p);
  for (int omega = 1; omega <= panel.N; ++omega) {
    const IndividualFit& fit = fits[omega - 1];
    if (fit.spectral_radius >= 1.0) ++explosive;
    const StateSeries s = build_states(panel.series(omega), p);
    const Eigen::Index m = s.size();
    const MatrixXd g0 = s.states * s.states.transpose() / static_cast<double>(m);
    const MatrixXd g1 = s.states.rightCols(m - 1) * s.states.leftCols(m - 1).transpose() /
                        static_cast<double>(m - 1);
    report.omega_hat += (g0 - fit.a_hat.matrix() * g1.transpose()) / n;
  }
  report.nonstationary_fraction = static_cast<double>(explosive) / n;

  const int total = 2 * max_power + max_lag;
  for (int v = 0; v <= max_power; ++v) {
    for (int u = 0; 2 * v + u <= total; ++u) {
      MatrixXd mu = MatrixXd::Zero(p * p, p * p);
      for (const auto& fit : fits) {
        mu += kron(matrix_power(fit.a_hat.matrix(), v), matrix_power(fit.a_hat.matrix(), v + u));
      }
      report.moment_hat.emplace(std::make_pair(v, u), mu / n);
    }
  }
  report.fits = std::move(fits);
  return report;
}

}  // namespace rcar
