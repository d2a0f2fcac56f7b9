// Acceptance suite: one PASS/FAIL line per criterion. argv[1] is the rcar
// binary used by the determinism check.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "rcar/covariance.hpp"
#include "rcar/estimators.hpp"
#include "rcar/harness.hpp"
#include "rcar/moments.hpp"
#include "rcar/oracle.hpp"
#include "rcar/simulator.hpp"
#include "rcar/stats.hpp"
#include "test_support.hpp"

namespace {

using namespace rcar;
namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

// Pinned tolerances.
constexpr double kSolverTol = 1e-8;
constexpr double kFixedPointTol = 1e-10;
constexpr double kClosedFormTol = 1e-10;
constexpr double kTwoAtomTol = 1e-9;
constexpr double kIdentifyTol = 1e-8;
constexpr double kSpectralTol = 1e-6;
constexpr double kZ = 4.0;
constexpr double kNoiseZ = 5.0;
constexpr double kSlopeTarget = -0.5;
constexpr double kConsistencyHalfwidth = 0.15;
constexpr double kAhatHalfwidth = 0.2;
constexpr double kNoiselessTol = 1e-10;
constexpr double kAc1Seconds = 5.0;
constexpr double kAc6Seconds = 10.0;
constexpr double kExperimentSeconds = 120.0;

constexpr double kTwoAtomUpsilon0 = 1.1160714285714286;

struct Outcome {
  bool passed;
  std::string detail;
};

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

CoefficientDistribution two_atom() {
  return CoefficientDistribution::discrete(
      {{CoefficientVector({0.2}), 0.5}, {CoefficientVector({0.4}), 0.5}});
}

struct RandomCase {
  CompanionMatrix a;
  MatrixXd omega;
};

std::vector<RandomCase> random_cases() {
  auto s = testing::test_stream(2024);
  std::vector<RandomCase> cases;
  for (int k = 0; k < 100; ++k) {
    const int p = 1 + k % 3;
    const CompanionMatrix a(testing::random_stationary_coeffs(s, p, 0.95));
    const double sigma2 = 0.5 + 1.5 * s.uniform();
    cases.push_back({a, omega_matrix(p, sigma2)});
  }
  return cases;
}

Outcome ac1() {
  const auto cases = random_cases();
  const auto start = Clock::now();
  double worst = 0.0;
  for (const auto& c : cases) {
    const MatrixXd d = gamma0_direct(c.a.matrix(), c.omega);
    const auto series = gamma0_series(c.a.matrix(), c.omega);
    worst = std::max(worst, max_abs(MatrixXd(d - series.value)));
  }
  const double t = seconds_since(start);
  return {worst < kSolverTol && t < kAc1Seconds,
          "max |direct - series| = " + fmt("%.3g", worst) + " (< 1e-8), " + fmt("%.3f", t) +
              " s (< 5 s)"};
}

Outcome ac2() {
  double worst_ratio = 0.0, min_eig = INFINITY;
  for (const auto& c : random_cases()) {
    const MatrixXd& a = c.a.matrix();
    const MatrixXd g = gamma0_direct(a, c.omega);
    const double residual = max_abs(MatrixXd(g - a * g * a.transpose() - c.omega));
    worst_ratio = std::max(worst_ratio, residual / (kFixedPointTol * (1.0 + max_abs(g))));
    min_eig = std::min(min_eig, Eigen::SelfAdjointEigenSolver<MatrixXd>(g).eigenvalues()(0));
  }
  return {worst_ratio < 1.0 && min_eig > 0.0,
          "max residual / (1e-10 (1 + |G|)) = " + fmt("%.3g", worst_ratio) +
              ", min eigenvalue = " + fmt("%.3g", min_eig)};
}

Outcome ac3() {
  double worst = 0.0;
  for (double a : {-0.9, -0.5, 0.0, 0.5, 0.9}) {
    const MatrixXd am = MatrixXd::Constant(1, 1, a);
    const MatrixXd om = MatrixXd::Constant(1, 1, 1.0);
    const double expected = 1.0 / (1.0 - a * a);
    worst = std::max(worst, std::abs(gamma0_direct(am, om)(0, 0) - expected));
    worst = std::max(worst, std::abs(gamma0_series(am, om).value(0, 0) - expected));
  }
  const double enumerated = oracle::scalar_upsilon({{0.2, 0.5}, {0.4, 0.5}}, 1.0, 0);
  const double y0 = upsilon_series(two_atom(), omega_matrix(1, 1.0), 0).value(0, 0);
  const double atom_err = std::max(std::abs(y0 - kTwoAtomUpsilon0),
                                   std::abs(enumerated - kTwoAtomUpsilon0));
  return {worst < kClosedFormTol && atom_err < kTwoAtomTol,
          "max |G(0) - 1/(1-a^2)| = " + fmt("%.3g", worst) + ", two-atom Y(0) = " +
              fmt("%.12f", y0) + " (err " + fmt("%.3g", atom_err) + ")"};
}

Outcome ac4() {
  double worst = 0.0;
  for (const auto& c : random_cases()) {
    const MatrixXd g0 = gamma0_direct(c.a.matrix(), c.omega);
    const MatrixXd g1 = gamma_u(c.a.matrix(), g0, 1);
    const MatrixXd a = identify_A_from_covariances(g1, g0);
    worst = std::max(worst, max_abs(MatrixXd(a - c.a.matrix())));
  }
  return {worst < kIdentifyTol, "max |A - A_recovered| = " + fmt("%.3g", worst)};
}

Outcome ac5() {
  auto s = testing::test_stream(505);
  double worst_ratio = 0.0;
  for (int k = 0; k < 20; ++k) {
    const int atoms = 1 + k % 3;
    std::vector<WeightedCoefficients> w;
    double total = 0.0;
    std::vector<double> weights;
    for (int j = 0; j < atoms; ++j) {
      weights.push_back(0.1 + s.uniform());
      total += weights.back();
    }
    for (int j = 0; j < atoms; ++j) {
      w.push_back({CoefficientVector({-0.9 + 1.8 * s.uniform()}), weights[j] / total});
    }
    const auto dist = CoefficientDistribution::discrete(w);
    const MatrixXd om = omega_matrix(1, 0.5 + s.uniform());
    const auto lag = spectral_density(dist, om, 0.0);
    const auto moment = spectral_density_zero_moment_form(dist, om);
    const double diff = std::abs(lag.value(0, 0) - moment.value(0, 0));
    worst_ratio = std::max(worst_ratio, diff / (lag.tail_bound + moment.tail_bound));
  }
  const auto ar = CoefficientDistribution::degenerate(CoefficientVector({0.5}));
  const double s0 = spectral_density(ar, omega_matrix(1, 1.0), 0.0).value(0, 0).real();
  const double err = std::abs(s0 - 2.0 / 3.141592653589793);
  return {worst_ratio <= 1.0 && err < kSpectralTol,
          "max |lag-sum - moment form| / combined tail = " + fmt("%.3g", worst_ratio) +
              ", |S(0) - 2/pi| = " + fmt("%.3g", err)};
}

Outcome ac6() {
  const auto start = Clock::now();
  const ModelSpec spec{1, CoefficientDistribution::degenerate(CoefficientVector({0.5})),
                       NoiseSpec::constant(1.0), 2000, 1};
  const Panel panel = simulate_panel(spec, 6, ExactStationary{}, false);
  double worst = 0.0;
  std::string detail;
  for (int t = 0; t <= 1; ++t) {
    std::vector<double> col(panel.y.rows());
    for (Eigen::Index i = 0; i < panel.y.rows(); ++i) col[i] = panel.y(i, t);
    const auto sum = stats::summarize(col);
    const double zv = std::abs(sum.variance - 4.0 / 3.0) / sum.variance_standard_error();
    const double zm = std::abs(sum.mean) / sum.standard_error();
    worst = std::max({worst, zv, zm});
    detail += "Var(y" + std::to_string(t) + ") = " + fmt("%.4f", sum.variance) + " (z " +
              fmt("%.2f", zv) + "), mean z " + fmt("%.2f", zm) + "; ";
  }
  const double t = seconds_since(start);
  return {worst < kZ && t < kAc6Seconds, detail + fmt("%.3f", t) + " s"};
}

Outcome ac7() {
  const ModelSpec spec{1, two_atom(), NoiseSpec::constant(1.0), 50, 20};
  const int R = 2000;
  std::vector<double> values(R);
  for (int r = 0; r < R; ++r) {
    const std::uint64_t seed =
        derive_key(7, {static_cast<std::uint64_t>(StreamPurpose::replication), 0,
                       static_cast<std::uint64_t>(r)});
    values[r] = upsilon_hat(simulate_panel(spec, seed, ExactStationary{}, false), 0).value(0, 0);
  }
  const auto sum = stats::summarize(values);
  const double z = std::abs(sum.mean - kTwoAtomUpsilon0) / sum.standard_error();
  return {z < kZ, "mean Y-hat(0) = " + fmt("%.6f", sum.mean) + ", SE " +
                      fmt("%.2g", sum.standard_error()) + ", z = " + fmt("%.2f", z)};
}

std::string check_summary(const ExperimentResult& r) {
  std::string out;
  for (const auto& c : r.checks) {
    out += c.name + "=" + fmt("%.4g", c.value) + (c.passed ? " ok" : " out of band") + "; ";
  }
  return out;
}

Outcome ac8() {
  const auto start = Clock::now();
  ExperimentPlan plan{.spec = {1, two_atom(), NoiseSpec::constant(1.0), 100, 20}};
  plan.grid = {100, 400, 1600};
  plan.replications = 200;
  plan.seed = 8;
  plan.statistics = {Statistic::rmse, Statistic::slope};
  plan.slope_target = kSlopeTarget;
  plan.slope_halfwidth = kConsistencyHalfwidth;
  const auto r = run_consistency(plan);
  const double t = seconds_since(start);
  return {r.passed() && !r.slopes.empty() && t < kExperimentSeconds,
          check_summary(r) + fmt("%.1f", t) + " s"};
}

Outcome ac9() {
  const auto start = Clock::now();
  ExperimentPlan plan{.spec = {1, two_atom(), NoiseSpec::constant(1.0), 1000, 20}};
  plan.grid = {500, 1000};
  plan.replications = 500;
  plan.seed = 9;
  plan.statistics = {Statistic::normality};
  const auto r = run_clt(plan);
  const double t = seconds_since(start);
  // The criterion covers the distribution screens; covariance stability is
  // printed but graded only by the mc harness.
  bool screens = true;
  for (const auto& c : r.checks) {
    if (c.name != "covariance_stability") screens = screens && c.passed;
  }
  return {screens && t < kExperimentSeconds,
          check_summary(r) + "(stability not graded here); " + fmt("%.1f", t) + " s"};
}

Outcome ac10() {
  const ModelSpec spec{1, two_atom(), NoiseSpec::constant(1.0), 2000, 30};
  const int R = 100;
  std::vector<double> values(R);
  for (int r = 0; r < R; ++r) {
    const std::uint64_t seed =
        derive_key(10, {static_cast<std::uint64_t>(StreamPurpose::replication), 0,
                        static_cast<std::uint64_t>(r)});
    const Panel panel = simulate_panel(spec, seed, ExactStationary{}, false);
    values[r] = estimate_cross_sectional(panel, 2).omega_hat(0, 0);
  }
  const auto sum = stats::summarize(values);
  const double z = std::abs(sum.mean - 1.0) / sum.standard_error();
  const std::vector<oracle::ScalarAtom> atoms{{0.2, 0.5}, {0.4, 0.5}};
  const double telescoped =
      oracle::scalar_upsilon(atoms, 1.0, 0) - oracle::scalar_upsilon(atoms, 1.0, 2);
  const double tel_err = std::abs(telescoped - 1.0);
  return {z < kNoiseZ && tel_err < 1e-15,
          "mean Omega-hat = " + fmt("%.5f", sum.mean) + " (z " + fmt("%.2f", z) +
              "), enumerated Y(0) - Y(2) - 1 = " + fmt("%.3g", tel_err)};
}

Outcome ac11() {
  const ModelSpec spec{2, CoefficientDistribution::degenerate(CoefficientVector({0.5, 0.3})),
                       NoiseSpec::constant(1.0), 1, 200};
  ExperimentPlan plan{.spec = spec};
  plan.sweep = SweepVariable::T;
  plan.grid = {200, 800, 3200};
  plan.replications = 200;
  plan.seed = 11;
  plan.slope_target = kSlopeTarget;
  plan.slope_halfwidth = kAhatHalfwidth;
  const auto noisy = run_ahat_convergence(plan);
  plan.noiseless = true;
  plan.replications = 3;
  plan.grid = {10, 100};
  const auto clean = run_ahat_convergence(plan);
  double worst = 0.0;
  for (const auto& p : clean.points) worst = std::max(worst, p.max_error);
  return {noisy.passed() && clean.passed() && worst < kNoiselessTol,
          check_summary(noisy) + "noiseless max error = " + fmt("%.3g", worst)};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Outcome ac12(const std::string& binary) {
  if (binary.empty()) return {false, "no rcar binary given"};
  const fs::path dir = fs::temp_directory_path() / "rcar_acceptance_determinism";
  fs::remove_all(dir);
  fs::create_directories(dir);
  {
    std::ofstream(dir / "sim.json") << R"({"model": {"p": 2, "coefficients": {"type": "gaussian",
      "mean": [0.4, 0.2], "covariance": [[0.01, 0], [0, 0.01]]}, "N": 300, "T": 25},
      "simulation": {"seed": 99, "keep_truth": true}, "threads": 2})";
    std::ofstream(dir / "mc.json") << R"({"model": {"p": 1, "coefficients": {"type": "discrete",
      "atoms": [{"alpha": [0.2], "probability": 0.5}, {"alpha": [0.4], "probability": 0.5}]},
      "T": 10}, "experiment": {"kind": "consistency", "grid": [50, 200], "replications": 40,
      "lags": [0, 1]}, "simulation": {"seed": 12}, "threads": 2})";
  }
  const std::string q = "\"" + binary + "\"";
  const std::string d = dir.string() + "/";
  bool ok = true;
  for (const char* tag : {"a", "b"}) {
    const std::string t(tag);
    ok &= std::system((q + " simulate " + d + "sim.json -o " + d + "sim_" + t +
                       ".csv > /dev/null").c_str()) == 0;
    const int rc = std::system((q + " mc " + d + "mc.json -o " + d + "mc_" + t +
                                ".json > /dev/null 2>&1").c_str());
    ok &= WIFEXITED(rc) && (WEXITSTATUS(rc) == 0 || WEXITSTATUS(rc) == 5);
  }
  if (!ok) return {false, "rcar invocation failed"};
  const bool sim = slurp(d + "sim_a.csv") == slurp(d + "sim_b.csv") &&
                   slurp(d + "sim_a.truth.csv") == slurp(d + "sim_b.truth.csv");
  const bool mc = slurp(d + "mc_a.json") == slurp(d + "mc_b.json");
  const bool nonempty = !slurp(d + "sim_a.csv").empty() && !slurp(d + "mc_a.json").empty();
  fs::remove_all(dir);
  return {sim && mc && nonempty, std::string("simulate ") + (sim ? "identical" : "DIFFERS") +
                                     ", mc " + (mc ? "identical" : "DIFFERS")};
}

}  // namespace

int main(int argc, char** argv) {
  const std::string binary = argc > 1 ? argv[1] : "";
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"AC1 solver equivalence", ac1},
      {"AC2 fixed point and positive definiteness", ac2},
      {"AC3 scalar closed forms", ac3},
      {"AC4 identification round-trip", ac4},
      {"AC5 spectral cross-check", ac5},
      {"AC6 simulation fidelity", ac6},
      {"AC7 estimator unbiasedness", ac7},
      {"AC8 consistency rate", ac8},
      {"AC9 CLT screen", ac9},
      {"AC10 noise recovery", ac10},
      {"AC11 A-hat convergence", ac11},
      {"AC12 determinism", [&] { return ac12(binary); }},
  };
  int failed = 0;
  for (const auto& [name, run] : criteria) {
    Outcome o{false, ""};
    try {
      o = run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    if (!o.passed) ++failed;
    std::cout << (o.passed ? "PASS " : "FAIL ") << name << ": " << o.detail << std::endl;
  }
  std::cout << (failed == 0 ? "all criteria passed" : std::to_string(failed) + " failed")
            << std::endl;
  return failed == 0 ? 0 : 1;
}
