#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "rcar/cli.hpp"
#include "rcar/config.hpp"
#include "rcar/panel_io.hpp"
#include "rcar/report.hpp"

namespace rcar {
namespace {

namespace fs = std::filesystem;

class TempDir : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("rcar_test_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  std::string path(const std::string& name) const { return (dir_ / name).string(); }

  std::string write(const std::string& name, const std::string& content) const {
    std::ofstream(path(name)) << content;
    return path(name);
  }

  static std::string read(const std::string& p) {
    std::ifstream in(p);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
  }

  struct Result {
    int code;
    std::string out, err;
  };
  static Result cli(std::vector<std::string> args) {
    std::ostringstream out, err;
    const int code = run_cli(args, out, err);
    return {code, out.str(), err.str()};
  }

  fs::path dir_;
};

const char* kAr1Config = R"({
  "model": {"p": 1, "coefficients": {"type": "degenerate", "alpha": [0.5]},
            "noise": {"type": "constant", "sigma2": 1.0}, "N": 2, "T": 3},
  "analysis": {"max_lag": 2, "lambda_grid": [0.0, 1.0]},
  "simulation": {"seed": 11, "keep_truth": true}
})";

const char* kTwoAtomConfig = R"({
  "model": {"p": 1, "coefficients": {"type": "discrete", "atoms": [
              {"alpha": [0.2], "probability": 0.5}, {"alpha": [0.4], "probability": 0.5}]},
            "N": 2000, "T": 30},
  "simulation": {"seed": 3, "keep_truth": true}
})";

// ---- Panel files

TEST(PanelCsv, RoundTripIsExact) {
  const ModelSpec spec{2, CoefficientDistribution::degenerate(CoefficientVector({0.5, 0.2})),
                       NoiseSpec::constant(1.0), 7, 9};
  const Panel panel = simulate_panel(spec, 1, ExactStationary{}, false);
  std::istringstream in(format_panel_csv(panel));
  const Panel back = parse_panel_csv(in, 2);
  EXPECT_EQ(back.N, panel.N);
  EXPECT_EQ(back.T, panel.T);
  EXPECT_EQ(back.y, panel.y);
}

TEST(PanelCsv, ExtremeValuesRoundTrip) {
  Panel panel;
  panel.N = 1;
  panel.T = 3;
  panel.p = 1;
  panel.y.resize(1, 4);
  panel.y << 1e-310, -1.7976931348623157e308, 0.1, 1.0 / 3.0;
  std::istringstream in(format_panel_csv(panel));
  EXPECT_EQ(parse_panel_csv(in, 1).y, panel.y);
}

struct BadCsv {
  const char* text;
  std::size_t line;
};

TEST(PanelCsv, MalformedRowsReportLines) {
  const std::vector<BadCsv> cases{
      {"omega,t,x\n1,0,1\n", 1},
      {"omega,t,y\n1,0,1\n1,2,1\n", 3},           // gap in t
      {"omega,t,y\n1,0,1\n1,1,1\n2,0,1\n3,0,1\n", 5},  // individual 2 too short
      {"omega,t,y\n1,0,1\n1,0,2\n", 3},           // duplicate
      {"omega,t,y\n2,0,1\n", 2},                  // missing individual 1
      {"omega,t,y\n1,0,abc\n", 2},
      {"omega,t,y\n1,0,1,4\n", 2},
      {"omega,t,y\n1,0,nan\n", 2},
  };
  for (const auto& c : cases) {
    std::istringstream in(c.text);
    try {
      parse_panel_csv(in, 1);
      ADD_FAILURE() << "accepted: " << c.text;
    } catch (const DataError& e) {
      EXPECT_EQ(e.line(), c.line) << c.text << " -> " << e.what();
    }
  }
}

TEST(PanelCsv, LastIndividualShort) {
  std::istringstream in("omega,t,y\n1,0,1\n1,1,1\n2,0,1\n");
  EXPECT_THROW(parse_panel_csv(in, 1), DataError);
}

TEST(TruthCsv, RoundTrip) {
  std::vector<IndividualDraw> truth{{CoefficientVector({0.5, 0.1}), 1.5, true, 0},
                                    {CoefficientVector({-0.25, 0.3}), 0.7, true, 0}};
  std::istringstream in(format_truth_csv(truth));
  const auto back = parse_truth_csv(in);
  ASSERT_EQ(back.size(), 2u);
  EXPECT_EQ(back[1].coeffs, truth[1].coeffs);
  EXPECT_EQ(back[1].sigma2, 0.7);
}

TEST(TruthCsv, PathNextToPanel) {
  EXPECT_EQ(truth_path_for("/tmp/x/panel.csv"), "/tmp/x/panel.truth.csv");
  EXPECT_EQ(truth_path_for("data"), "data.truth.csv");
}

// ---- Config

TEST(Config, UnknownKeyNamesPath) {
  const auto doc = Json::parse(R"({"model": {"p": 1, "coefficients":
      {"type": "degenerate", "alpha": [0.5], "beta": 1}}})");
  try {
    parse_config(doc);
    FAIL();
  } catch (const ConfigError& e) {
    EXPECT_EQ(e.path(), "/model/coefficients/beta");
  }
}

TEST(Config, TypeAndValueErrors) {
  EXPECT_THROW(parse_config(Json::parse(R"({"threads": "two"})")), ConfigError);
  EXPECT_THROW(parse_config(Json::parse(R"({"numerics": {"tol": -1}})")), ConfigError);
  EXPECT_THROW(parse_config(Json::parse(R"({"model": {"p": 2, "coefficients":
      {"type": "degenerate", "alpha": [0.5]}}})")),
               ConfigError);
  EXPECT_THROW(parse_config(Json::parse(R"({"model": {"p": 1, "coefficients":
      {"type": "discrete", "atoms": [{"alpha": [0.5], "probability": 0.3}]}}})")),
               ConfigError);
  try {
    parse_config(Json::parse(R"({"simulation": {"init": {"mode": "warm"}}})"));
    FAIL();
  } catch (const ConfigError& e) {
    EXPECT_EQ(e.path(), "/simulation/init/mode");
  }
}

TEST(Config, EffectiveConfigRoundTrips) {
  const Config c = parse_config(Json::parse(kTwoAtomConfig));
  const Json effective = to_json(c);
  EXPECT_EQ(to_json(parse_config(effective)), effective);
  EXPECT_EQ(effective["numerics"]["max_terms"], 100000);
}

TEST(Config, DefaultsReferenceCoversParsedKeys) {
  const Json ref = defaults_reference();
  const Json effective = to_json(parse_config(Json::parse(kTwoAtomConfig)));
  for (const auto& [section, body] : effective.items()) {
    ASSERT_TRUE(ref.contains(section)) << section;
    if (!body.is_object()) continue;
    for (const auto& [key, value] : body.items()) {
      EXPECT_TRUE(ref[section].contains(key)) << section << "/" << key;
    }
  }
}

TEST(Config, InitModeText) {
  EXPECT_EQ(std::get<BurnIn>(parse_init_mode("burn_in:20")).steps, 20);
  EXPECT_EQ(std::get<MaTruncation>(parse_init_mode("ma_truncation")).terms, 50);
  EXPECT_THROW(parse_init_mode("burn_in:x"), InvalidArgument);
  EXPECT_THROW(parse_init_mode("burn_in:-3"), InvalidArgument);
}

// ---- Commands

TEST_F(TempDir, AnalyzeStationary) {
  const auto cfg = write("a.json", kAr1Config);
  const auto r = cli({"analyze", cfg});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  const Json j = Json::parse(r.out);
  EXPECT_EQ(j["schema_version"], kSchemaVersion);
  EXPECT_EQ(j["result"]["verdict"], "stationary");
  const double y0 = j["result"]["unconditional_covariances"]["lags"][0]["value"][0][0];
  EXPECT_NEAR(y0, 4.0 / 3.0, 1e-10);
  const double s0 = j["result"]["spectral_density"][0]["value"]["re"][0][0];
  EXPECT_NEAR(s0, 0.636620, 1e-6);
  EXPECT_TRUE(j["config"].contains("numerics"));
}

TEST_F(TempDir, AnalyzeUnitRootGivesVerdictOnly) {
  const auto cfg = write("a.json", R"({"model": {"p": 1, "coefficients":
      {"type": "degenerate", "alpha": [1.0]}}})");
  const auto r = cli({"analyze", cfg});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  const Json j = Json::parse(r.out);
  EXPECT_EQ(j["result"]["verdict"], "nonstationary");
  EXPECT_FALSE(j["result"].contains("unconditional_covariances"));
  EXPECT_FALSE(j["result"].contains("conditional_covariances"));
}

TEST_F(TempDir, AnalyzeConfigErrorExitCode) {
  const auto cfg = write("a.json", R"({"modle": {}})");
  const auto r = cli({"analyze", cfg});
  EXPECT_EQ(r.code, kExitConfig);
  EXPECT_NE(r.err.find("/modle"), std::string::npos);
  EXPECT_EQ(cli({"analyze", path("missing.json")}).code, kExitConfig);
}

TEST_F(TempDir, SimulateDenseGridAndSidecar) {
  const auto cfg = write("a.json", kAr1Config);
  const auto out = path("p.csv");
  const auto r = cli({"simulate", cfg, "-o", out});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  EXPECT_NE(r.out.find("seed=11"), std::string::npos);
  std::istringstream lines(read(out));
  std::string line;
  int rows = -1;
  while (std::getline(lines, line)) ++rows;
  EXPECT_EQ(rows, 8);
  std::istringstream truth(read(path("p.truth.csv")));
  EXPECT_EQ(parse_truth_csv(truth).size(), 2u);
}

TEST_F(TempDir, SimulateIsDeterministicAndSeedOverrides) {
  const auto cfg = write("a.json", kAr1Config);
  ASSERT_EQ(cli({"simulate", cfg, "-o", path("a.csv")}).code, kExitOk);
  ASSERT_EQ(cli({"simulate", cfg, "-o", path("b.csv")}).code, kExitOk);
  ASSERT_EQ(cli({"simulate", cfg, "-o", path("c.csv"), "--seed", "12"}).code, kExitOk);
  EXPECT_EQ(read(path("a.csv")), read(path("b.csv")));
  EXPECT_NE(read(path("a.csv")), read(path("c.csv")));
}

TEST_F(TempDir, EstimateAllZeroPanel) {
  std::string csv = "omega,t,y\n";
  for (int i = 1; i <= 3; ++i)
    for (int t = 0; t <= 4; ++t) csv += std::to_string(i) + "," + std::to_string(t) + ",0\n";
  const auto panel = write("z.csv", csv);
  const auto r = cli({"estimate", panel});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  const Json j = Json::parse(r.out);
  for (const auto& lag : j["result"]["cross_sectional"]["upsilon_hat"]["lags"]) {
    EXPECT_EQ(lag["value"][0][0].get<double>(), 0.0);
  }
  EXPECT_TRUE(j["result"]["cross_sectional"].contains("diagnostic"));
}

TEST_F(TempDir, EstimateMalformedPanelExitCode) {
  const auto panel = write("bad.csv", "omega,t,y\n1,0,1\n1,2,3\n");
  const auto r = cli({"estimate", panel});
  EXPECT_EQ(r.code, kExitData);
  EXPECT_NE(r.err.find("line 3"), std::string::npos);
}

TEST_F(TempDir, EstimateLagBeyondT) {
  const auto panel = write("s.csv", "omega,t,y\n1,0,1\n1,1,2\n2,0,0.5\n2,1,0.1\n");
  EXPECT_EQ(cli({"estimate", panel, "--max-lag", "5"}).code, kExitConfig);
}

TEST_F(TempDir, EstimateTwoAtomNoise) {
  const auto cfg = write("t.json", kTwoAtomConfig);
  ASSERT_EQ(cli({"simulate", cfg, "-o", path("t.csv")}).code, kExitOk);
  const auto r = cli({"estimate", path("t.csv"), "--pathway", "both"});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  const Json j = Json::parse(r.out);
  const double omega_hat = j["result"]["cross_sectional"]["omega_hat"][0][0];
  EXPECT_NEAR(omega_hat, 1.0, 0.1);
  EXPECT_TRUE(j["result"].contains("truth"));
  EXPECT_TRUE(j["result"]["per_individual"]["fits"][0].contains("alpha_error"));
  EXPECT_FALSE(j["result"]["stationarity_diagnostic"]["flagged"].get<bool>());
}

TEST_F(TempDir, EstimateBothPathwaysAgreeForDegenerate) {
  const auto cfg = write("d.json", R"({"model": {"p": 1, "coefficients":
      {"type": "degenerate", "alpha": [0.5]}, "N": 400, "T": 60}, "simulation": {"seed": 4}})");
  ASSERT_EQ(cli({"simulate", cfg, "-o", path("d.csv")}).code, kExitOk);
  const auto r = cli({"estimate", path("d.csv"), "--pathway", "both"});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  const Json j = Json::parse(r.out);
  const double rho1 = j["result"]["cross_sectional"]["rho_hat"][0]["value"][0][0];
  const double mean_a = j["result"]["per_individual"]["mean_alpha_hat"][0];
  EXPECT_NEAR(rho1, mean_a, 0.03);
}

TEST_F(TempDir, McValidationError) {
  const auto cfg = write("m.json", R"({"model": {"p": 1, "coefficients":
      {"type": "degenerate", "alpha": [0.0]}},
      "experiment": {"kind": "clt", "grid": [100], "replications": 10}})");
  EXPECT_EQ(cli({"mc", cfg}).code, kExitConfig);
}

TEST_F(TempDir, McWhiteNoiseConsistencyPasses) {
  const auto cfg = write("m.json", R"({"model": {"p": 1, "coefficients":
      {"type": "degenerate", "alpha": [0.0]}, "T": 5},
      "experiment": {"kind": "consistency", "grid": [100, 400, 1600], "replications": 100,
                     "statistics": ["rmse", "slope"]}})");
  const auto r = cli({"mc", cfg, "-o", path("m_out.json")});
  EXPECT_EQ(r.code, kExitOk) << r.err;
  const Json j = Json::parse(read(path("m_out.json")));
  EXPECT_TRUE(j["result"]["passed"].get<bool>());
}

TEST_F(TempDir, OracleSubcases) {
  auto r = cli({"oracle", "two_atom_upsilon0"});
  EXPECT_EQ(r.code, kExitOk);
  EXPECT_NE(r.out.find("upsilon(0) = 1.1160714285714286"), std::string::npos);
  EXPECT_NE(r.out.find("0.52083333333333337"), std::string::npos);
  r = cli({"oracle", "roots", "0.5", "0.3"});
  EXPECT_NE(r.out.find("root1_re = 0.8520797289396148"), std::string::npos);
  r = cli({"oracle", "ar1_gamma0", "a=0.5"});
  EXPECT_NE(r.out.find("1.333333333333333"), std::string::npos);
  EXPECT_EQ(cli({"oracle", "no_such_case"}).code, kExitConfig);
}

TEST_F(TempDir, UsageErrors) {
  EXPECT_EQ(cli({}).code, kExitConfig);
  EXPECT_EQ(cli({"frobnicate"}).code, kExitConfig);
  EXPECT_EQ(cli({"--help"}).code, kExitOk);
  EXPECT_EQ(cli({"config-defaults"}).code, kExitOk);
}

}  // namespace
}  // namespace rcar
