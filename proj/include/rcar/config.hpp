#pragma once

#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "rcar/estimators.hpp"
#include "rcar/harness.hpp"
#include "rcar/moments.hpp"
#include "rcar/simulator.hpp"

namespace rcar {

using Json = nlohmann::ordered_json;

struct SimulationOptions {
  InitMode init = ExactStationary{};
  std::uint64_t seed = 1;
  bool keep_truth = false;
  DrawOptions draw{};
};

struct NumericsOptions {
  SeriesOptions series{};
  double boundary_tol = kDefaultBoundaryTol;
  SamplingOptions sampling{};
};

struct AnalysisOptions {
  int max_lag = 5;
  std::vector<double> lambda_grid{0.0};
};

enum class PathwaySelection { cross_sectional, per_individual, both };

struct EstimationOptions {
  PathwaySelection pathway = PathwaySelection::cross_sectional;
  int max_lag = 2;
  int max_power = 2;
};

enum class ExperimentKind { consistency, clt, ahat_convergence };

struct ExperimentOptions {
  ExperimentKind kind = ExperimentKind::consistency;
  SweepVariable sweep = SweepVariable::N;
  std::vector<int> grid;
  int replications = 200;
  std::vector<int> lags{0};
  std::uint64_t seed = 1;
  std::set<Statistic> statistics{Statistic::bias, Statistic::rmse, Statistic::slope};
  double slope_target = -0.5;
  double slope_halfwidth = 0.15;
  bool noiseless = false;
};

struct Config {
  std::optional<ModelSpec> model;
  SimulationOptions simulation{};
  NumericsOptions numerics{};
  AnalysisOptions analysis{};
  EstimationOptions estimation{};
  std::optional<ExperimentOptions> experiment;
  unsigned threads = 1;
};

/// Builds a Config from a parsed document. Unknown keys, wrong types and
/// invalid values raise ConfigError naming the JSON pointer of the offender.
Config parse_config(const Json& document);
Config load_config(const std::string& path);

/// Effective configuration with every default expanded.
Json to_json(const Config& config);
Json to_json(const ModelSpec& spec);
Json to_json(const InitMode& init);

/// Every recognised key with its default and a one-line description.
Json defaults_reference();

ExperimentPlan make_plan(const Config& config);

std::string pathway_selection_name(PathwaySelection p);
PathwaySelection parse_pathway(const std::string& name);
ExperimentKind parse_experiment_kind(const std::string& name);
std::string experiment_kind_name(ExperimentKind k);
/// "exact_stationary", "burn_in[:B]" or "ma_truncation[:J]".
InitMode parse_init_mode(const std::string& text);

}  // namespace rcar
