#include "rcar/cli.hpp"

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>

#include <CLI11.hpp>

#include "rcar/config.hpp"
#include "rcar/oracle.hpp"
#include "rcar/panel_io.hpp"
#include "rcar/parallel.hpp"
#include "rcar/report.hpp"

namespace rcar {

namespace {

struct Overrides {
  std::optional<double> tol;
  std::optional<std::size_t> max_terms;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> init;
  std::optional<std::string> pathway;
};

std::optional<std::uint64_t> env_seed() {
  const char* env = std::getenv("RCAR_SEED");
  if (!env || !*env) return std::nullopt;
  char* end = nullptr;
  const unsigned long long v = std::strtoull(env, &end, 10);
  if (*end != '\0') throw ConfigError("RCAR_SEED", "expected a non-negative integer");
  return v;
}

/// Flags beat environment variables, which beat the config file.
void apply_overrides(Config& config, const Overrides& o) {
  if (o.tol) {
    if (!(*o.tol > 0.0)) throw ConfigError("--tol", "must be > 0");
    config.numerics.series.tol = *o.tol;
  }
  if (o.max_terms) {
    if (*o.max_terms < 1) throw ConfigError("--max-terms", "must be >= 1");
    config.numerics.series.max_terms = *o.max_terms;
  }
  std::optional<std::uint64_t> seed = o.seed ? o.seed : env_seed();
  if (seed) {
    config.simulation.seed = *seed;
    if (config.experiment) config.experiment->seed = *seed;
  }
  if (o.init) {
    try {
      config.simulation.init = parse_init_mode(*o.init);
    } catch (const InvalidArgument& e) {
      throw ConfigError("--init", e.what());
    }
  }
  if (o.pathway) {
    try {
      config.estimation.pathway = parse_pathway(*o.pathway);
    } catch (const InvalidArgument& e) {
      throw ConfigError("--pathway", e.what());
    }
  }
  if (const char* env = std::getenv("RCAR_THREADS"); env && *env) {
    config.threads = default_threads();
  }
}

void emit(const std::string& content, const std::string& path, std::ostream& out) {
  if (path.empty() || path == "-") {
    out << content;
  } else {
    write_atomic(path, content);
  }
}

Config config_or_default(const std::string& path) {
  return path.empty() ? Config{} : load_config(path);
}

int cmd_analyze(const std::string& config_path, const Overrides& o, const std::string& out_path,
                std::ostream& out) {
  Config config = load_config(config_path);
  apply_overrides(config, o);
  emit(dump(envelope("analysis", to_json(config), analyze_model(config))), out_path, out);
  return kExitOk;
}

int cmd_simulate(const std::string& config_path, const Overrides& o, const std::string& out_path,
                 std::optional<bool> keep_truth, std::ostream& out) {
  Config config = load_config(config_path);
  apply_overrides(config, o);
  if (keep_truth) config.simulation.keep_truth = *keep_truth;
  if (!config.model) throw ConfigError("/model", "simulate needs a model section");
  const auto& sim = config.simulation;
  const Panel panel = simulate_panel(*config.model, sim.seed, sim.init, sim.keep_truth, sim.draw,
                                     config.threads);
  write_panel_csv(panel, out_path);
  std::string truth_path;
  if (panel.truth) {
    truth_path = truth_path_for(out_path);
    write_truth_csv(*panel.truth, truth_path);
  }
  out << "seed=" << sim.seed << " N=" << panel.N << " T=" << panel.T << " p=" << panel.p
      << " init=" << init_mode_name(sim.init) << " panel=" << out_path;
  if (!truth_path.empty()) out << " truth=" << truth_path;
  out << '\n';
  return kExitOk;
}

int cmd_estimate(const std::string& panel_path, const std::string& config_path,
                 const Overrides& o, std::optional<int> p_flag, std::optional<int> max_lag,
                 std::string truth_path, const std::string& out_path, std::ostream& out) {
  Config config = config_or_default(config_path);
  apply_overrides(config, o);
  if (max_lag) {
    if (*max_lag < 2) throw ConfigError("--max-lag", "must be >= 2");
    config.estimation.max_lag = *max_lag;
  }
  std::optional<std::vector<IndividualDraw>> truth;
  if (truth_path.empty()) {
    const std::string guess = truth_path_for(panel_path);
    if (std::ifstream(guess).good()) truth_path = guess;
  }
  if (!truth_path.empty()) truth = read_truth_csv(truth_path);

  int p = 1;
  if (p_flag) p = *p_flag;
  else if (config.model) p = config.model->p;
  else if (truth) p = truth->front().coeffs.order();
  if (p < 1) throw ConfigError("--p", "must be >= 1");
  if (truth && truth->front().coeffs.order() != p) {
    throw DataError("truth sidecar order " + std::to_string(truth->front().coeffs.order()) +
                    " does not match p = " + std::to_string(p));
  }

  const Panel panel = read_panel_csv(panel_path, p);
  Json effective = to_json(config);
  effective["input"] = {{"panel", panel_path}, {"truth", truth_path}, {"p", p}};
  emit(dump(envelope("estimation", effective, estimation_json(panel, config, truth))), out_path,
       out);
  return kExitOk;
}

int cmd_mc(const std::string& config_path, const Overrides& o, const std::string& out_path,
           std::ostream& out, std::ostream& err) {
  Config config = load_config(config_path);
  apply_overrides(config, o);
  const ExperimentPlan plan = make_plan(config);
  ExperimentResult result;
  switch (config.experiment->kind) {
    case ExperimentKind::consistency: result = run_consistency(plan); break;
    case ExperimentKind::clt: result = run_clt(plan); break;
    case ExperimentKind::ahat_convergence: result = run_ahat_convergence(plan); break;
  }
  emit(dump(envelope("experiment", to_json(config), to_json(result))), out_path, out);
  for (const auto& c : result.checks) {
    err << (c.passed ? "PASS " : "FAIL ") << c.name << " value=" << format_double(c.value)
        << " band=[" << format_double(c.lower) << ", " << format_double(c.upper) << "]\n";
  }
  return result.passed() ? kExitOk : kExitAcceptance;
}

int cmd_oracle(const std::string& name, const std::vector<std::string>& args, bool list,
               std::ostream& out) {
  if (list || name.empty()) {
    for (const auto& [key, usage] : oracle::registry()) out << key << "  " << usage << '\n';
    return kExitOk;
  }
  const auto result = oracle::run(name, args);
  out << result.name << '\n';
  for (const auto& line : result.derivation) out << "  " << line << '\n';
  for (const auto& [key, value] : result.values) {
    out << key << " = " << format_double(value) << '\n';
  }
  return kExitOk;
}

void add_numeric_overrides(CLI::App* cmd, Overrides& o) {
  cmd->add_option("--tol", o.tol, "series truncation tolerance");
  cmd->add_option("--max-terms", o.max_terms, "series term cap");
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Random coefficient autoregressive panels: analysis, simulation, estimation and "
               "Monte Carlo checks",
               "rcar"};
  app.require_subcommand(1);

  Overrides o;
  std::string config_path, out_path, panel_path, truth_path, oracle_name;
  std::optional<int> p_flag, max_lag;
  std::optional<bool> keep_truth;
  std::vector<std::string> oracle_args;
  bool oracle_list = false;

  auto* analyze = app.add_subcommand("analyze", "stationarity, covariances and spectral density");
  analyze->add_option("config", config_path, "JSON config")->required();
  analyze->add_option("-o,--out", out_path, "report path (stdout if omitted)");
  add_numeric_overrides(analyze, o);

  auto* simulate = app.add_subcommand("simulate", "simulate a panel to CSV");
  simulate->add_option("config", config_path, "JSON config")->required();
  simulate->add_option("-o,--out", out_path, "panel CSV path")->required();
  simulate->add_option("--seed", o.seed, "root seed");
  simulate->add_option("--init", o.init, "exact_stationary | burn_in[:B] | ma_truncation[:J]");
  simulate->add_flag("--keep-truth,!--no-keep-truth", keep_truth, "write the truth sidecar");
  add_numeric_overrides(simulate, o);

  auto* estimate = app.add_subcommand("estimate", "estimate moments from a panel CSV");
  estimate->add_option("panel", panel_path, "panel CSV")->required();
  estimate->add_option("-c,--config", config_path, "JSON config for estimation options");
  estimate->add_option("--p", p_flag, "autoregressive order (default: config, sidecar or 1)");
  estimate->add_option("--max-lag", max_lag, "largest lag of Upsilon-hat");
  estimate->add_option("--pathway", o.pathway, "cross_sectional | per_individual | both");
  estimate->add_option("--truth", truth_path, "truth sidecar (default: <stem>.truth.csv if present)");
  estimate->add_option("-o,--out", out_path, "report path (stdout if omitted)");
  add_numeric_overrides(estimate, o);

  auto* mc = app.add_subcommand("mc", "run a Monte Carlo experiment");
  mc->add_option("config", config_path, "JSON config with model and experiment sections")
      ->required();
  mc->add_option("-o,--out", out_path, "result path (stdout if omitted)");
  mc->add_option("--seed", o.seed, "root seed of the replications");
  mc->add_option("--init", o.init, "exact_stationary | burn_in[:B] | ma_truncation[:J]");
  add_numeric_overrides(mc, o);

  auto* oracle_cmd = app.add_subcommand("oracle", "print closed-form reference values");
  oracle_cmd->add_option("subcase", oracle_name, "registered subcase");
  oracle_cmd->add_option("args", oracle_args, "subcase arguments (key=value or numbers)");
  oracle_cmd->add_flag("--list", oracle_list, "list registered subcases");

  auto* defaults = app.add_subcommand("config-defaults", "print every config key and default");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitConfig;
  }

  try {
    if (*analyze) return cmd_analyze(config_path, o, out_path, out);
    if (*simulate) return cmd_simulate(config_path, o, out_path, keep_truth, out);
    if (*estimate) {
      return cmd_estimate(panel_path, config_path, o, p_flag, max_lag, truth_path, out_path, out);
    }
    if (*mc) return cmd_mc(config_path, o, out_path, out, err);
    if (*oracle_cmd) return cmd_oracle(oracle_name, oracle_args, oracle_list, out);
    if (*defaults) {
      out << dump(defaults_reference());
      return kExitOk;
    }
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const InvalidArgument& e) {
    err << "invalid argument: " << e.what() << '\n';
    return kExitConfig;
  } catch (const DataError& e) {
    err << "data error: " << e.what() << '\n';
    return kExitData;
  } catch (const NumericalError& e) {
    err << "numerical error: " << e.what() << '\n';
    return kExitNumerical;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitOther;
  }
  return kExitOther;
}

}  // namespace rcar
