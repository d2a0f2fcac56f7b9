#include "rcar/report.hpp"

#include <cmath>

namespace rcar {

Json to_json(const MatrixXd& m) {
  Json rows = Json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    Json row = Json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

Json to_json(const MatrixXcd& m) {
  return {{"re", to_json(MatrixXd(m.real()))}, {"im", to_json(MatrixXd(m.imag()))}};
}

Json envelope(const std::string& kind, const Json& effective_config, Json result) {
  return {{"schema_version", kSchemaVersion},
          {"kind", kind},
          {"config", effective_config},
          {"result", std::move(result)}};
}

std::string dump(const Json& j) { return j.dump(2) + "\n"; }

namespace {

Json covariance_json(const CovarianceSet& set) {
  Json lags = Json::array();
  for (int u = 0; u <= set.max_lag(); ++u) {
    lags.push_back({{"lag", u}, {"value", to_json(set.at(u))}});
  }
  return {{"kind", set.kind == CovarianceKind::conditional ? "conditional" : "unconditional"},
          {"lags", lags},
          {"truncation_order", set.truncation_order},
          {"tail_bound", set.tail_bound}};
}

Json atom_json(const CoefficientVector& alpha, double probability, double tol) {
  Json roots = Json::array();
  for (const auto& r : char_poly_roots(alpha)) {
    roots.push_back({{"re", r.real()}, {"im", r.imag()}, {"modulus", std::abs(r)}});
  }
  const MatrixXd a = companion_matrix(alpha.alpha());
  return {{"alpha", std::vector<double>(alpha.alpha().data(),
                                        alpha.alpha().data() + alpha.order())},
          {"probability", probability},
          {"roots", roots},
          {"spectral_radius", spectral_radius(a)},
          {"stationary", is_stationary_draw(alpha, tol)}};
}

}  // namespace

Json analyze_model(const Config& config) {
  if (!config.model) throw ConfigError("/model", "analyze needs a model section");
  const ModelSpec& spec = *config.model;
  const auto& numerics = config.numerics;
  const double tol = numerics.boundary_tol;
  const auto& dist = spec.coefficients;
  const ExpectationMode mode =
      dist.is_gaussian() ? ExpectationMode::sample(numerics.sampling) : ExpectationMode::exact();

  Json out;
  bool atoms_stationary = true;
  if (dist.is_gaussian()) {
    const auto existence = spectral_existence_check(dist, tol, numerics.sampling);
    out["coefficient_law"] = {{"type", "gaussian"},
                              {"mean", atom_json(CoefficientVector(dist.mean()), 1.0, tol)},
                              {"worst_sampled_radius", existence.worst_radius},
                              {"nonstationary_mass", existence.violating_mass},
                              {"diagnostic", existence.diagnostic}};
  } else {
    Json atoms = Json::array();
    for (const auto& atom : dist.atoms()) {
      atoms.push_back(atom_json(atom.value, atom.probability, tol));
      atoms_stationary = atoms_stationary && atoms.back()["stationary"].get<bool>();
    }
    out["coefficient_law"] = {{"type", dist.atoms().size() == 1 ? "degenerate" : "discrete"},
                              {"atoms", atoms}};
  }

  const auto second = is_second_order_stationary(dist, tol, numerics.sampling);
  out["second_order"] = {{"stationary", second.stationary},
                         {"radius_E_AkronA", second.radius},
                         {"approximate", second.approximate},
                         {"samples", second.samples}};

  Json verdict = {{"stationary", false}, {"reason", ""}};
  if (!second.stationary) {
    verdict["reason"] = "spectral radius of E{A (x) A} is not below 1";
  } else if (!atoms_stationary) {
    verdict["reason"] =
        "some coefficient atoms are explosive; unconditional moments diverge even though "
        "E{A (x) A} is contractive";
  } else {
    verdict = {{"stationary", true}, {"reason", "all atoms and E{A (x) A} inside the unit circle"}};
  }
  out["verdict"] = verdict["stationary"].get<bool>() ? "stationary" : "nonstationary";
  out["verdict_reason"] = verdict["reason"];
  if (!verdict["stationary"].get<bool>()) return out;

  const int max_lag = config.analysis.max_lag;
  if (!dist.is_gaussian()) {
    Json conditional = Json::array();
    for (const auto& atom : dist.atoms()) {
      const auto set = conditional_covariances(CompanionMatrix(atom.value),
                                               spec.mean_omega(), max_lag, tol);
      conditional.push_back(covariance_json(set));
    }
    out["conditional_covariances"] = conditional;
  }

  try {
    const auto ups =
        unconditional_covariances(dist, spec.mean_omega(), max_lag, numerics.series, mode);
    out["unconditional_covariances"] = covariance_json(ups);

    Json spectral = Json::array();
    for (double lambda : config.analysis.lambda_grid) {
      const auto s = spectral_density(dist, spec.mean_omega(), lambda, numerics.series, mode);
      spectral.push_back({{"lambda", lambda},
                          {"value", to_json(s.value)},
                          {"truncation_order", s.truncation_order},
                          {"tail_bound", s.tail_bound}});
    }
    out["spectral_density"] = spectral;
    const auto zero = spectral_density_zero_moment_form(dist, spec.mean_omega(), numerics.series,
                                                        mode, MomentFactorization::joint);
    out["spectral_density_zero_moment_form"] = {{"value", to_json(zero.value)},
                                                {"truncation_order", zero.truncation_order},
                                                {"tail_bound", zero.tail_bound}};
  } catch (const TruncationError& e) {
    out["truncation_error"] = e.what();
  }
  if (mode.sampled) {
    out["approximate"] = true;
    out["expectation_samples"] = numerics.sampling.samples;
  }
  return out;
}

namespace {

Json report_common(const EstimationReport& r) {
  Json ups = covariance_json(r.upsilon_hat);
  ups["counts"] = r.lag_counts;
  Json j = {{"pathway", pathway_name(r.pathway)}, {"N", r.N}, {"T", r.T}, {"p", r.p},
            {"upsilon_hat", ups}};
  return j;
}

Json cross_sectional_json(const EstimationReport& r) {
  Json j = report_common(r);
  Json rho = Json::array();
  for (const auto& [u, m] : r.rho_hat) rho.push_back({{"lag", u}, {"value", to_json(m)}});
  j["rho_hat"] = rho;
  j["omega_hat"] = to_json(r.omega_hat);
  j["heuristic"] = r.heuristic;
  j["warnings"] = r.warnings;
  return j;
}

Json per_individual_json(const EstimationReport& r,
                         const std::optional<std::vector<IndividualDraw>>& truth) {
  Json j = report_common(r);
  j["omega_hat"] = to_json(r.omega_hat);
  j["nonstationary_fraction"] = r.nonstationary_fraction;
  const auto& fits = *r.fits;
  const int p = r.p;
  VectorXd mean_alpha = VectorXd::Zero(p);
  Json rows = Json::array();
  double abs_error = 0.0;
  for (std::size_t i = 0; i < fits.size(); ++i) {
    const VectorXd alpha = fits[i].a_hat.coefficients().alpha();
    mean_alpha += alpha / static_cast<double>(fits.size());
    Json row = {{"omega", i + 1},
                {"alpha_hat", std::vector<double>(alpha.data(), alpha.data() + p)},
                {"sigma2_hat", fits[i].sigma2_hat},
                {"spectral_radius", fits[i].spectral_radius},
                {"gram_condition", fits[i].gram_condition}};
    if (truth) {
      const VectorXd err = alpha - (*truth)[i].coeffs.alpha();
      row["alpha_error"] = std::vector<double>(err.data(), err.data() + p);
      row["sigma2_error"] = fits[i].sigma2_hat - (*truth)[i].sigma2;
      abs_error += err.cwiseAbs().sum() / (static_cast<double>(p) * fits.size());
    }
    rows.push_back(std::move(row));
  }
  j["mean_alpha_hat"] = std::vector<double>(mean_alpha.data(), mean_alpha.data() + p);
  j["mean_a_hat"] = to_json(companion_matrix(mean_alpha));
  if (truth) j["mean_abs_alpha_error"] = abs_error;
  j["fits"] = rows;
  Json moments = Json::array();
  for (const auto& [vu, m] : r.moment_hat) {
    moments.push_back({{"v", vu.first}, {"u", vu.second}, {"value", to_json(m)}});
  }
  j["moment_hat"] = moments;
  j["warnings"] = r.warnings;
  return j;
}

}  // namespace

Json estimation_json(const Panel& panel, const Config& config,
                     const std::optional<std::vector<IndividualDraw>>& truth) {
  panel.validate();
  if (truth && static_cast<int>(truth->size()) != panel.N) {
    throw DataError("truth sidecar has " + std::to_string(truth->size()) +
                    " rows but the panel has N = " + std::to_string(panel.N));
  }
  const auto& opts = config.estimation;
  if (opts.max_lag > max_estimable_lag(panel)) {
    throw InvalidArgument("estimate: max_lag " + std::to_string(opts.max_lag) +
                          " exceeds T - p + 1 = " + std::to_string(max_estimable_lag(panel)));
  }
  Json out;
  const bool cross = opts.pathway != PathwaySelection::per_individual;
  const bool per = opts.pathway != PathwaySelection::cross_sectional;

  if (cross) {
    try {
      out["cross_sectional"] = cross_sectional_json(estimate_cross_sectional(panel, opts.max_lag));
    } catch (const RankDeficiencyError& e) {
      // Degenerate panels (e.g. all zeros) still get their covariance tables.
      Json j = report_common(upsilon_tables(panel, opts.max_lag));
      j["diagnostic"] = e.what();
      out["cross_sectional"] = j;
    }
  }
  if (per) {
    out["per_individual"] =
        per_individual_json(estimate_per_individual(panel, opts.max_power, opts.max_lag), truth);
  }

  if (truth) {
    double mean_sigma2 = 0.0;
    VectorXd mean_alpha = VectorXd::Zero(panel.p);
    for (const auto& d : *truth) {
      mean_sigma2 += d.sigma2 / static_cast<double>(truth->size());
      mean_alpha += d.coeffs.alpha() / static_cast<double>(truth->size());
    }
    out["truth"] = {{"mean_sigma2", mean_sigma2},
                    {"mean_alpha", std::vector<double>(mean_alpha.data(),
                                                       mean_alpha.data() + panel.p)}};
    for (const char* key : {"cross_sectional", "per_individual"}) {
      if (!out.contains(key) || !out[key].contains("omega_hat")) continue;
      const double omega_pp = out[key]["omega_hat"][panel.p - 1][panel.p - 1].get<double>();
      out[key]["omega_hat_error"] = omega_pp - mean_sigma2;
    }
  }

  if (panel.T >= panel.p) {
    const auto diag = run_stationarity_diagnostic(panel);
    out["stationarity_diagnostic"] = {{"N", diag.N},
                                      {"mean_t0", std::vector<double>(diag.mean0.data(),
                                                                      diag.mean0.data() + panel.p)},
                                      {"mean_t1", std::vector<double>(diag.mean1.data(),
                                                                      diag.mean1.data() + panel.p)},
                                      {"second_moment_t0", to_json(diag.second0)},
                                      {"second_moment_t1", to_json(diag.second1)},
                                      {"max_z", diag.max_z},
                                      {"flagged", diag.flagged},
                                      {"warnings", diag.warnings}};
  }
  return out;
}

Json to_json(const ExperimentResult& result) {
  Json points = Json::array();
  for (const auto& point : result.points) {
    Json p = {{"value", point.value}, {"replications", point.replications}};
    if (!point.lags.empty()) {
      Json lags = Json::array();
      for (const auto& lag : point.lags) {
        lags.push_back({{"lag", lag.lag},
                        {"target", to_json(lag.target)},
                        {"bias", to_json(lag.bias)},
                        {"bias_se", to_json(lag.bias_se)},
                        {"rmse", to_json(lag.rmse)},
                        {"aggregate_rmse", lag.aggregate_rmse},
                        {"aggregate_rmse_se", lag.aggregate_rmse_se}});
      }
      p["lags"] = lags;
    }
    if (!point.skipped_lags.empty()) p["skipped_lags"] = point.skipped_lags;
    if (!point.normality.empty()) {
      Json norm = Json::array();
      for (const auto& d : point.normality) {
        norm.push_back({{"coordinate", d.coordinate},
                        {"replications", d.replications},
                        {"mean", d.mean},
                        {"mean_se", d.mean_se},
                        {"skewness", d.skewness},
                        {"skewness_se", d.skewness_se},
                        {"excess_kurtosis", d.excess_kurtosis},
                        {"kurtosis_se", d.kurtosis_se},
                        {"ks_scaled", d.ks_scaled},
                        {"passed", d.passed}});
      }
      p["normality"] = norm;
    }
    if (point.limiting_covariance) p["limiting_covariance"] = to_json(*point.limiting_covariance);
    if (result.kind == "ahat_convergence") {
      p["mean_error"] = point.mean_error;
      p["mean_error_se"] = point.mean_error_se;
      p["max_error"] = point.max_error;
    }
    points.push_back(std::move(p));
  }
  Json slopes = Json::array();
  for (const auto& s : result.slopes) {
    slopes.push_back({{"lag", s.lag},
                      {"slope", s.slope},
                      {"slope_se", s.slope_se},
                      {"ci95", {s.ci_low, s.ci_high}}});
  }
  Json checks = Json::array();
  for (const auto& c : result.checks) {
    checks.push_back({{"name", c.name},
                      {"passed", c.passed},
                      {"value", c.value},
                      {"lower", c.lower},
                      {"upper", c.upper},
                      {"detail", c.detail}});
  }
  Json j = {{"kind", result.kind}, {"points", points}, {"slopes", slopes}, {"checks", checks},
            {"passed", result.passed()}};
  if (result.covariance_relative_change) {
    j["covariance_relative_change"] = *result.covariance_relative_change;
  }
  return j;
}

}  // namespace rcar
