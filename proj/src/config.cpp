#include "rcar/config.hpp"

#include <fstream>
#include <sstream>

namespace rcar {

namespace {

/// Object view that records which keys were consumed, so leftovers can be
/// reported as unknown.
class Section {
 public:
  Section(const Json& node, std::string path) : node_(node), path_(std::move(path)) {
    if (!node_.is_object()) throw ConfigError(where(), "expected an object");
  }

  bool has(const std::string& key) const { return node_.contains(key); }
  std::string child_path(const std::string& key) const { return path_ + "/" + key; }

  const Json& raw(const std::string& key) {
    seen_.insert(key);
    return node_.at(key);
  }

  Section section(const std::string& key) { return Section(raw(key), child_path(key)); }

  template <class T>
  T get(const std::string& key, T fallback) {
    if (!has(key)) return fallback;
    return convert<T>(raw(key), child_path(key));
  }

  template <class T>
  T require(const std::string& key) {
    if (!has(key)) throw ConfigError(child_path(key), "required key is missing");
    return convert<T>(raw(key), child_path(key));
  }

  void finish() const {
    for (auto it = node_.begin(); it != node_.end(); ++it) {
      if (!seen_.count(it.key())) throw ConfigError(child_path(it.key()), "unknown key");
    }
  }

  const std::string& path() const { return path_; }

  template <class T>
  static T convert(const Json& v, const std::string& path) {
    if constexpr (std::is_same_v<T, bool>) {
      if (!v.is_boolean()) throw ConfigError(path, "expected a boolean");
      return v.get<bool>();
    } else if constexpr (std::is_same_v<T, std::uint64_t>) {
      if (!v.is_number_unsigned()) throw ConfigError(path, "expected a non-negative integer");
      return v.get<std::uint64_t>();
    } else if constexpr (std::is_integral_v<T>) {
      if (!v.is_number_integer()) throw ConfigError(path, "expected an integer");
      const auto x = v.get<std::int64_t>();
      if (x < static_cast<std::int64_t>(std::numeric_limits<T>::min()) ||
          x > static_cast<std::int64_t>(std::numeric_limits<T>::max())) {
        throw ConfigError(path, "integer out of range");
      }
      return static_cast<T>(x);
    } else if constexpr (std::is_floating_point_v<T>) {
      if (!v.is_number()) throw ConfigError(path, "expected a number");
      return v.get<double>();
    } else if constexpr (std::is_same_v<T, std::string>) {
      if (!v.is_string()) throw ConfigError(path, "expected a string");
      return v.get<std::string>();
    } else if constexpr (std::is_same_v<T, std::vector<double>> ||
                         std::is_same_v<T, std::vector<int>>) {
      if (!v.is_array()) throw ConfigError(path, "expected an array");
      T out;
      for (std::size_t i = 0; i < v.size(); ++i) {
        out.push_back(convert<typename T::value_type>(v[i], path + "/" + std::to_string(i)));
      }
      return out;
    } else {
      static_assert(sizeof(T) == 0, "unsupported config type");
    }
  }

 private:
  std::string where() const { return path_.empty() ? "/" : path_; }

  const Json& node_;
  std::string path_;
  std::set<std::string> seen_;
};

VectorXd to_vector(const std::vector<double>& v) {
  return Eigen::Map<const VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

std::vector<double> to_std(const VectorXd& v) { return {v.data(), v.data() + v.size()}; }

template <class F>
auto wrap(const std::string& path, F&& f) -> decltype(f()) {
  try {
    return f();
  } catch (const ConfigError&) {
    throw;
  } catch (const InvalidArgument& e) {
    throw ConfigError(path, e.what());
  }
}

CoefficientVector parse_alpha(Section& s, const std::string& key) {
  const auto values = s.require<std::vector<double>>(key);
  return wrap(s.child_path(key), [&] { return CoefficientVector(to_vector(values)); });
}

CoefficientDistribution parse_coefficients(Section s) {
  const auto type = s.require<std::string>("type");
  CoefficientDistribution dist = [&] {
    if (type == "degenerate") {
      const auto alpha = parse_alpha(s, "alpha");
      return CoefficientDistribution::degenerate(alpha);
    }
    if (type == "discrete") {
      const Json& atoms = s.raw("atoms");
      if (!atoms.is_array()) throw ConfigError(s.child_path("atoms"), "expected an array");
      std::vector<WeightedCoefficients> out;
      for (std::size_t i = 0; i < atoms.size(); ++i) {
        Section atom(atoms[i], s.child_path("atoms") + "/" + std::to_string(i));
        const auto alpha = parse_alpha(atom, "alpha");
        const auto prob = atom.require<double>("probability");
        atom.finish();
        out.push_back({alpha, prob});
      }
      return wrap(s.child_path("atoms"),
                  [&] { return CoefficientDistribution::discrete(std::move(out)); });
    }
    if (type == "gaussian") {
      const auto mean = s.require<std::vector<double>>("mean");
      const Json& cov = s.raw("covariance");
      const auto cpath = s.child_path("covariance");
      if (!cov.is_array() || cov.size() != mean.size()) {
        throw ConfigError(cpath, "expected a p x p array of rows");
      }
      MatrixXd c(mean.size(), mean.size());
      for (std::size_t i = 0; i < cov.size(); ++i) {
        const auto row =
            Section::convert<std::vector<double>>(cov[i], cpath + "/" + std::to_string(i));
        if (row.size() != mean.size()) {
          throw ConfigError(cpath + "/" + std::to_string(i), "row length must equal p");
        }
        for (std::size_t j = 0; j < row.size(); ++j) c(i, j) = row[j];
      }
      return wrap(s.path(),
                  [&] { return CoefficientDistribution::gaussian(to_vector(mean), c); });
    }
    throw ConfigError(s.child_path("type"), "expected degenerate, discrete or gaussian");
  }();
  s.finish();
  return dist;
}

NoiseSpec parse_noise(Section s) {
  const auto type = s.get<std::string>("type", "constant");
  NoiseSpec noise = [&] {
    if (type == "constant") {
      const double sigma2 = s.get<double>("sigma2", 1.0);
      return wrap(s.child_path("sigma2"), [&] { return NoiseSpec::constant(sigma2); });
    }
    if (type == "discrete") {
      const Json& atoms = s.raw("atoms");
      if (!atoms.is_array()) throw ConfigError(s.child_path("atoms"), "expected an array");
      std::vector<NoiseSpec::Atom> out;
      for (std::size_t i = 0; i < atoms.size(); ++i) {
        Section atom(atoms[i], s.child_path("atoms") + "/" + std::to_string(i));
        out.push_back({atom.require<double>("sigma2"), atom.require<double>("probability")});
        atom.finish();
      }
      return wrap(s.child_path("atoms"), [&] { return NoiseSpec::discrete(std::move(out)); });
    }
    throw ConfigError(s.child_path("type"), "expected constant or discrete");
  }();
  s.finish();
  return noise;
}

InitMode parse_init(Section s) {
  const auto mode = s.get<std::string>("mode", "exact_stationary");
  InitMode init;
  if (mode == "exact_stationary") {
    init = ExactStationary{};
  } else if (mode == "burn_in") {
    BurnIn b;
    b.steps = s.get<int>("steps", b.steps);
    if (s.has("initial_state")) {
      b.initial_state = to_vector(s.require<std::vector<double>>("initial_state"));
    }
    init = b;
  } else if (mode == "ma_truncation") {
    init = MaTruncation{s.get<int>("terms", MaTruncation{}.terms)};
  } else {
    throw ConfigError(s.child_path("mode"),
                      "expected exact_stationary, burn_in or ma_truncation");
  }
  s.finish();
  wrap(s.path(), [&] { validate(init); });
  return init;
}

Statistic parse_statistic(const std::string& name, const std::string& path) {
  if (name == "bias") return Statistic::bias;
  if (name == "rmse") return Statistic::rmse;
  if (name == "slope") return Statistic::slope;
  if (name == "normality") return Statistic::normality;
  throw ConfigError(path, "unknown statistic '" + name + "'");
}

ExperimentOptions parse_experiment(Section s) {
  ExperimentOptions e;
  if (s.has("kind")) {
    const auto kind = s.require<std::string>("kind");
    e.kind = wrap(s.child_path("kind"), [&] { return parse_experiment_kind(kind); });
  }
  // Defaults follow the kind so a minimal plan is runnable.
  if (e.kind == ExperimentKind::ahat_convergence) e.sweep = SweepVariable::T;
  if (e.kind == ExperimentKind::clt) {
    e.statistics = {Statistic::normality};
    e.replications = 500;
  }
  if (s.has("sweep")) {
    const auto sweep = s.require<std::string>("sweep");
    if (sweep == "N") e.sweep = SweepVariable::N;
    else if (sweep == "T") e.sweep = SweepVariable::T;
    else throw ConfigError(s.child_path("sweep"), "expected N or T");
  }
  e.grid = s.require<std::vector<int>>("grid");
  e.replications = s.get<int>("replications", e.replications);
  e.lags = s.get<std::vector<int>>("lags", e.lags);
  e.seed = s.get<std::uint64_t>("seed", e.seed);
  if (s.has("statistics")) {
    const Json& stats = s.raw("statistics");
    if (!stats.is_array()) throw ConfigError(s.child_path("statistics"), "expected an array");
    e.statistics.clear();
    for (std::size_t i = 0; i < stats.size(); ++i) {
      const auto item_path = s.child_path("statistics") + "/" + std::to_string(i);
      e.statistics.insert(
          parse_statistic(Section::convert<std::string>(stats[i], item_path), item_path));
    }
  }
  e.slope_target = s.get<double>("slope_target", e.slope_target);
  e.slope_halfwidth = s.get<double>(
      "slope_halfwidth", e.kind == ExperimentKind::ahat_convergence ? 0.2 : e.slope_halfwidth);
  e.noiseless = s.get<bool>("noiseless", e.noiseless);
  s.finish();
  return e;
}

}  // namespace

std::string pathway_selection_name(PathwaySelection p) {
  switch (p) {
    case PathwaySelection::cross_sectional: return "cross_sectional";
    case PathwaySelection::per_individual: return "per_individual";
    case PathwaySelection::both: return "both";
  }
  return "?";
}

PathwaySelection parse_pathway(const std::string& name) {
  if (name == "cross_sectional") return PathwaySelection::cross_sectional;
  if (name == "per_individual") return PathwaySelection::per_individual;
  if (name == "both") return PathwaySelection::both;
  throw InvalidArgument("unknown pathway '" + name +
                        "' (expected cross_sectional, per_individual or both)");
}

ExperimentKind parse_experiment_kind(const std::string& name) {
  if (name == "consistency") return ExperimentKind::consistency;
  if (name == "clt") return ExperimentKind::clt;
  if (name == "ahat_convergence") return ExperimentKind::ahat_convergence;
  throw InvalidArgument("unknown experiment kind '" + name +
                        "' (expected consistency, clt or ahat_convergence)");
}

std::string experiment_kind_name(ExperimentKind k) {
  switch (k) {
    case ExperimentKind::consistency: return "consistency";
    case ExperimentKind::clt: return "clt";
    case ExperimentKind::ahat_convergence: return "ahat_convergence";
  }
  return "?";
}

InitMode parse_init_mode(const std::string& text) {
  const auto colon = text.find(':');
  const std::string name = text.substr(0, colon);
  std::optional<int> arg;
  if (colon != std::string::npos) {
    std::size_t used = 0;
    const std::string rest = text.substr(colon + 1);
    try {
      arg = std::stoi(rest, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || used != rest.size()) {
      throw InvalidArgument("init mode: cannot parse '" + rest + "' as an integer");
    }
  }
  InitMode init;
  if (name == "exact_stationary" && !arg) {
    init = ExactStationary{};
  } else if (name == "burn_in") {
    init = BurnIn{arg.value_or(BurnIn{}.steps), std::nullopt};
  } else if (name == "ma_truncation") {
    init = MaTruncation{arg.value_or(MaTruncation{}.terms)};
  } else {
    throw InvalidArgument("init mode: expected exact_stationary, burn_in[:B] or ma_truncation[:J]");
  }
  validate(init);
  return init;
}

Config parse_config(const Json& document) {
  Section root(document, "");
  Config config;

  if (root.has("numerics")) {
    Section s = root.section("numerics");
    auto& n = config.numerics;
    n.series.tol = s.get<double>("tol", n.series.tol);
    n.series.max_terms = s.get<std::size_t>("max_terms", n.series.max_terms);
    n.boundary_tol = s.get<double>("boundary_tol", n.boundary_tol);
    n.sampling.samples = s.get<std::size_t>("samples", n.sampling.samples);
    n.sampling.seed = s.get<std::uint64_t>("sampling_seed", n.sampling.seed);
    s.finish();
    if (!(n.series.tol > 0.0)) throw ConfigError(s.child_path("tol"), "must be > 0");
    if (n.series.max_terms < 1) throw ConfigError(s.child_path("max_terms"), "must be >= 1");
    if (!(n.boundary_tol > 0.0 && n.boundary_tol <= 0.1)) {
      throw ConfigError(s.child_path("boundary_tol"), "must lie in (0, 0.1]");
    }
    if (n.sampling.samples < 1) throw ConfigError(s.child_path("samples"), "must be >= 1");
    n.sampling.boundary_tol = n.boundary_tol;
  }

  if (root.has("model")) {
    Section s = root.section("model");
    const int p = s.require<int>("p");
    auto coefficients = parse_coefficients(s.section("coefficients"));
    NoiseSpec noise = s.has("noise") ? parse_noise(s.section("noise")) : NoiseSpec::constant(1.0);
    const int N = s.get<int>("N", 100);
    const int T = s.get<int>("T", 20);
    s.finish();
    ModelSpec spec{p, std::move(coefficients), std::move(noise), N, T};
    wrap(s.path(), [&] { spec.validate(); });
    config.model = std::move(spec);
  }

  if (root.has("simulation")) {
    Section s = root.section("simulation");
    auto& sim = config.simulation;
    if (s.has("init")) sim.init = parse_init(s.section("init"));
    sim.seed = s.get<std::uint64_t>("seed", sim.seed);
    sim.keep_truth = s.get<bool>("keep_truth", sim.keep_truth);
    const auto policy = s.get<std::string>("nonstationary_policy", "reject_and_redraw");
    if (policy == "reject_and_redraw") {
      sim.draw.policy = NonstationaryPolicy::reject_and_redraw;
    } else if (policy == "keep_and_flag") {
      sim.draw.policy = NonstationaryPolicy::keep_and_flag;
    } else {
      throw ConfigError(s.child_path("nonstationary_policy"),
                        "expected reject_and_redraw or keep_and_flag");
    }
    sim.draw.max_redraws = s.get<std::size_t>("max_redraws", sim.draw.max_redraws);
    s.finish();
  }
  config.simulation.draw.boundary_tol = config.numerics.boundary_tol;

  if (root.has("analysis")) {
    Section s = root.section("analysis");
    config.analysis.max_lag = s.get<int>("max_lag", config.analysis.max_lag);
    config.analysis.lambda_grid = s.get<std::vector<double>>("lambda_grid",
                                                             config.analysis.lambda_grid);
    s.finish();
    if (config.analysis.max_lag < 0) throw ConfigError(s.child_path("max_lag"), "must be >= 0");
  }

  if (root.has("estimation")) {
    Section s = root.section("estimation");
    auto& e = config.estimation;
    if (s.has("pathway")) {
      const auto name = s.require<std::string>("pathway");
      e.pathway = wrap(s.child_path("pathway"), [&] { return parse_pathway(name); });
    }
    e.max_lag = s.get<int>("max_lag", e.max_lag);
    e.max_power = s.get<int>("max_power", e.max_power);
    s.finish();
    if (e.max_lag < 2) throw ConfigError(s.child_path("max_lag"), "must be >= 2");
    if (e.max_power < 0) throw ConfigError(s.child_path("max_power"), "must be >= 0");
  }

  if (root.has("experiment")) config.experiment = parse_experiment(root.section("experiment"));

  const int threads = root.get<int>("threads", 1);
  if (threads < 1) throw ConfigError("/threads", "must be >= 1");
  config.threads = static_cast<unsigned>(threads);
  root.finish();
  return config;
}

Config load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(path, "cannot open config file");
  Json document;
  try {
    document = Json::parse(in, nullptr, true, true);
  } catch (const Json::parse_error& e) {
    throw ConfigError(path, std::string("parse error: ") + e.what());
  }
  return parse_config(document);
}

Json to_json(const InitMode& init) {
  Json j;
  j["mode"] = init_mode_name(init);
  if (const auto* b = std::get_if<BurnIn>(&init)) {
    j["steps"] = b->steps;
    if (b->initial_state) j["initial_state"] = to_std(*b->initial_state);
  } else if (const auto* m = std::get_if<MaTruncation>(&init)) {
    j["terms"] = m->terms;
  }
  return j;
}

Json to_json(const ModelSpec& spec) {
  Json coefficients;
  std::visit(
      [&](const auto& d) {
        using T = std::decay_t<decltype(d)>;
        if constexpr (std::is_same_v<T, DegenerateCoefficients>) {
          coefficients["type"] = "degenerate";
          coefficients["alpha"] = to_std(d.value.alpha());
        } else if constexpr (std::is_same_v<T, DiscreteCoefficients>) {
          coefficients["type"] = "discrete";
          coefficients["atoms"] = Json::array();
          for (const auto& atom : d.atoms) {
            coefficients["atoms"].push_back(
                {{"alpha", to_std(atom.value.alpha())}, {"probability", atom.probability}});
          }
        } else {
          coefficients["type"] = "gaussian";
          coefficients["mean"] = to_std(d.mean);
          Json rows = Json::array();
          for (Eigen::Index i = 0; i < d.covariance.rows(); ++i) {
            rows.push_back(to_std(d.covariance.row(i).transpose()));
          }
          coefficients["covariance"] = rows;
        }
      },
      spec.coefficients.variant());

  Json noise;
  if (spec.noise.is_constant()) {
    noise["type"] = "constant";
    noise["sigma2"] = spec.noise.atoms().front().sigma2;
  } else {
    noise["type"] = "discrete";
    noise["atoms"] = Json::array();
    for (const auto& atom : spec.noise.atoms()) {
      noise["atoms"].push_back({{"sigma2", atom.sigma2}, {"probability", atom.probability}});
    }
  }
  return {{"p", spec.p}, {"coefficients", coefficients}, {"noise", noise},
          {"N", spec.N}, {"T", spec.T}};
}

Json to_json(const Config& config) {
  Json j;
  if (config.model) j["model"] = to_json(*config.model);
  const auto& sim = config.simulation;
  j["simulation"] = {
      {"init", to_json(sim.init)},
      {"seed", sim.seed},
      {"keep_truth", sim.keep_truth},
      {"nonstationary_policy", sim.draw.policy == NonstationaryPolicy::reject_and_redraw
                                   ? "reject_and_redraw"
                                   : "keep_and_flag"},
      {"max_redraws", sim.draw.max_redraws}};
  const auto& n = config.numerics;
  j["numerics"] = {{"tol", n.series.tol},
                   {"max_terms", n.series.max_terms},
                   {"boundary_tol", n.boundary_tol},
                   {"samples", n.sampling.samples},
                   {"sampling_seed", n.sampling.seed}};
  j["analysis"] = {{"max_lag", config.analysis.max_lag},
                   {"lambda_grid", config.analysis.lambda_grid}};
  j["estimation"] = {{"pathway", pathway_selection_name(config.estimation.pathway)},
                     {"max_lag", config.estimation.max_lag},
                     {"max_power", config.estimation.max_power}};
  if (config.experiment) {
    const auto& e = *config.experiment;
    Json stats = Json::array();
    for (auto s : e.statistics) stats.push_back(statistic_name(s));
    j["experiment"] = {{"kind", experiment_kind_name(e.kind)},
                       {"sweep", sweep_name(e.sweep)},
                       {"grid", e.grid},
                       {"replications", e.replications},
                       {"lags", e.lags},
                       {"seed", e.seed},
                       {"statistics", stats},
                       {"slope_target", e.slope_target},
                       {"slope_halfwidth", e.slope_halfwidth},
                       {"noiseless", e.noiseless}};
  }
  j["threads"] = config.threads;
  return j;
}

Json defaults_reference() {
  auto key = [](Json def, const char* doc) { return Json{{"default", std::move(def)}, {"doc", doc}}; };
  const SeriesOptions series;
  const SamplingOptions sampling;
  const DrawOptions draw;
  const ExperimentOptions experiment;
  return {
      {"model",
       {{"p", key(nullptr, "autoregressive order, required")},
        {"coefficients",
         key(nullptr,
             "required; {type: degenerate, alpha: [a1..ap]} | {type: discrete, atoms: "
             "[{alpha, probability}]} | {type: gaussian, mean: [..], covariance: [[..]]}")},
        {"noise", key({{"type", "constant"}, {"sigma2", 1.0}},
                      "{type: constant, sigma2} | {type: discrete, atoms: [{sigma2, probability}]}")},
        {"N", key(100, "number of individuals")},
        {"T", key(20, "last time index; each series holds y_0..y_T")}}},
      {"simulation",
       {{"init", key({{"mode", "exact_stationary"}},
                     "{mode: exact_stationary} | {mode: burn_in, steps: 500, initial_state: "
                     "[..]} | {mode: ma_truncation, terms: 50}")},
        {"seed", key(1, "root seed; RCAR_SEED and --seed override")},
        {"keep_truth", key(false, "write the per-individual truth sidecar")},
        {"nonstationary_policy",
         key("reject_and_redraw", "reject_and_redraw | keep_and_flag")},
        {"max_redraws", key(draw.max_redraws, "consecutive rejections before failing")}}},
      {"numerics",
       {{"tol", key(series.tol, "series truncation threshold on the max-abs term; --tol")},
        {"max_terms", key(series.max_terms, "series term cap; --max-terms")},
        {"boundary_tol", key(kDefaultBoundaryTol, "stationarity margin below spectral radius 1")},
        {"samples", key(sampling.samples, "draws for gaussian coefficient expectations")},
        {"sampling_seed", key(sampling.seed, "seed of the expectation sample")}}},
      {"analysis",
       {{"max_lag", key(5, "largest lag of the covariance tables")},
        {"lambda_grid", key(std::vector<double>{0.0}, "frequencies for the spectral density")}}},
      {"estimation",
       {{"pathway", key("cross_sectional", "cross_sectional | per_individual | both; --pathway")},
        {"max_lag", key(2, "largest lag of Upsilon-hat, >= 2")},
        {"max_power", key(2, "largest v of the per-individual moments")}}},
      {"experiment",
       {{"kind", key("consistency", "consistency | clt | ahat_convergence")},
        {"sweep", key("N", "N for consistency and clt, T for ahat_convergence")},
        {"grid", key(nullptr, "strictly increasing values of the swept dimension, required")},
        {"replications", key(experiment.replications, "R; 500 for clt")},
        {"lags", key(experiment.lags, "lags u of Upsilon-hat(u) to check")},
        {"seed", key(experiment.seed, "root seed of the replications")},
        {"statistics", key(Json::array({"bias", "rmse", "slope"}),
                           "subset of bias, rmse, slope, normality; [normality] for clt")},
        {"slope_target", key(experiment.slope_target, "expected log-log slope")},
        {"slope_halfwidth", key(experiment.slope_halfwidth, "accepted slope band; 0.2 for "
                                                            "ahat_convergence")},
        {"noiseless", key(false, "ahat_convergence with zero innovations")}}},
      {"threads", key(1, "worker threads; RCAR_THREADS overrides")},
  };
}

ExperimentPlan make_plan(const Config& config) {
  if (!config.model) throw ConfigError("/model", "an experiment needs a model section");
  if (!config.experiment) throw ConfigError("/experiment", "missing experiment section");
  const auto& e = *config.experiment;
  ExperimentPlan plan{.spec = *config.model, .grid = e.grid};
  plan.sweep = e.sweep;
  plan.grid = e.grid;
  plan.replications = e.replications;
  plan.lags = e.lags;
  plan.seed = e.seed;
  plan.statistics = e.statistics;
  plan.init = config.simulation.init;
  plan.draw = config.simulation.draw;
  plan.series = config.numerics.series;
  plan.sampling = config.numerics.sampling;
  plan.slope_target = e.slope_target;
  plan.slope_halfwidth = e.slope_halfwidth;
  plan.noiseless = e.noiseless;
  plan.threads = config.threads;
  return plan;
}

}  // namespace rcar
