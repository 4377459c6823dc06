#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "nashseek/cli.hpp"
#include "nashseek/config.hpp"
#include "nashseek/error.hpp"

using namespace nashseek;

namespace {

Json resolved(const std::string& scenario, std::vector<std::string> sets = {},
              std::optional<std::string> algo = std::nullopt) {
  ConfigSources src;
  src.scenario = scenario;
  src.overrides = std::move(sets);
  src.algo = std::move(algo);
  return resolve_config(src);
}

ErrorCode code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no error thrown";
  return ErrorCode::DimensionMismatch;
}

std::filesystem::path scratch_dir(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / ("nashseek_test_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

}  // namespace

TEST(Config, ScenarioNames) {
  EXPECT_EQ(canonical_scenario_name("vehicle_formation"), "vehicles");
  EXPECT_EQ(canonical_scenario_name("turbines"), "turbines");
  EXPECT_EQ(code_of([] { (void)canonical_scenario_name("boats"); }), ErrorCode::ConfigInvalid);
}

TEST(Config, AliasesExpand) {
  EXPECT_EQ(expand_alias("mu"), "observer.mu");
  EXPECT_EQ(expand_alias("alpha1"), "gains.alpha1");
  EXPECT_EQ(expand_alias("dt"), "sim.dt");
  EXPECT_EQ(expand_alias("gains.epsilon"), "gains.epsilon");
}

TEST(Config, OverridesAndAlgoLayering) {
  const Json doc = resolved("vehicles", {"mu=0.01", "gains.alpha3=25", "params.vehicles.0.mass=2000"}, "output");
  EXPECT_DOUBLE_EQ(doc.at("observer").at("mu").get<double>(), 0.01);
  EXPECT_DOUBLE_EQ(doc.at("gains").at("alpha3").get<double>(), 25.0);
  EXPECT_EQ(doc.at("algo"), "output");
  const ResolvedRun r = build_run(doc);
  EXPECT_DOUBLE_EQ(r.observer.mu, 0.01);
  EXPECT_EQ(r.sim.mode, Mode::OutputBased);
  EXPECT_NEAR(r.scenario.plants[0].w(1), 6.412 / 2000.0, 1e-15);
}

TEST(Config, DefaultsBuildBothScenarios) {
  const ResolvedRun v = build_run(resolved("vehicles"));
  EXPECT_EQ(v.gains.order_n, 2u);
  EXPECT_DOUBLE_EQ(v.gains.alpha1, 3.0);
  EXPECT_TRUE(v.formation.has_value());
  const ResolvedRun t = build_run(resolved("turbines"));
  EXPECT_EQ(t.gains.order_n, 4u);
  EXPECT_DOUBLE_EQ(t.gains.alpha3, 40.0);
  EXPECT_TRUE(check_gain_ordering(t.gains).passes());
}

TEST(Config, UnknownKeysRejected) {
  EXPECT_EQ(code_of([] { (void)resolved("vehicles", {"gains.alpha4=1"}); }), ErrorCode::ConfigInvalid);
  EXPECT_EQ(code_of([] { (void)resolved("vehicles", {"sim.dtt=0.1"}); }), ErrorCode::ConfigInvalid);
  EXPECT_EQ(code_of([] { (void)resolved("vehicles", {"nonsense"}); }), ErrorCode::ConfigInvalid);
}

TEST(Config, MalformedJsonReportsLineAndColumn) {
  try {
    (void)parse_config_text("{\n  \"gains\": {\n    \"alpha1\": 3,,\n  }\n}", "bad.json");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::ConfigInvalid);
    EXPECT_NE(std::string(e.what()).find("bad.json:3:"), std::string::npos) << e.what();
  }
}

TEST(Config, FileMergesOverDefaults) {
  const auto dir = scratch_dir("merge");
  const auto path = dir / "cfg.json";
  std::ofstream(path) << R"({"scenario": "turbines", "sim": {"horizon": 5}})";
  ConfigSources src;
  src.config_file = path;
  const Json doc = resolve_config(src);
  EXPECT_EQ(doc.at("scenario"), "turbines");
  EXPECT_DOUBLE_EQ(doc.at("sim").at("horizon").get<double>(), 5.0);
  EXPECT_DOUBLE_EQ(doc.at("sim").at("dt").get<double>(), 1e-3);
}

TEST(Config, GraphFromOneBasedEdges) {
  const Json spec = Json::parse(R"({"n": 3, "edges": [{"to": 1, "from": 3, "w": 2.5},
                                                     {"to": 2, "from": 1, "w": 1},
                                                     {"to": 3, "from": 2, "w": 1}]})");
  const Digraph g = graph_from(spec);
  EXPECT_EQ(g.size(), 3u);
  EXPECT_DOUBLE_EQ(g.weight(0, 2), 2.5);
  EXPECT_DOUBLE_EQ(g.weight(1, 0), 1.0);
  EXPECT_TRUE(is_strongly_connected(g));
  const Json bad = Json::parse(R"({"n": 2, "edges": [{"to": 0, "from": 1, "w": 1}]})");
  EXPECT_EQ(code_of([&] { (void)graph_from(bad); }), ErrorCode::ConfigInvalid);
}

TEST(Cli, RunWritesArtifactsAndSettles) {
  const auto dir = scratch_dir("run");
  std::ostringstream log;
  const RunOutcome r = cmd_run(resolved("vehicles", {}, "state"), dir, log);
  EXPECT_EQ(r.exit_code, kExitOk);
  EXPECT_TRUE(std::filesystem::exists(dir / "trajectory.csv"));
  EXPECT_TRUE(std::filesystem::exists(dir / "summary.json"));
  std::ifstream in(dir / "summary.json");
  const Json summary = Json::parse(in);
  EXPECT_FALSE(summary.at("diverged").get<bool>());
  EXPECT_LT(summary.at("final_error").get<double>(), 1e-2);
  EXPECT_TRUE(summary.contains("config_echo"));
}

TEST(Cli, RunThatCannotSettleReturnsNumericCode) {
  const auto dir = scratch_dir("short");
  std::ostringstream log;
  EXPECT_EQ(cmd_run(resolved("vehicles", {"horizon=0.5"}), dir, log).exit_code, kExitNumeric);
}

TEST(Cli, RunWithDisconnectedGraphIsConfigError) {
  const auto dir = scratch_dir("disconnected");
  std::ostringstream log;
  Json doc = resolved("turbines");
  doc["params"]["graph"] = Json::parse(R"({"n": 6, "edges": [{"to": 2, "from": 1, "w": 1}]})");
  EXPECT_EQ(cmd_run(doc, dir, log).exit_code, kExitConfig);
}

TEST(Cli, EmptySweepWritesHeaderOnly) {
  std::ostringstream csv;
  const auto cells = cmd_sweep(resolved("vehicles"), "mu", {}, csv, 2);
  EXPECT_TRUE(cells.empty());
  EXPECT_EQ(csv.str(), "value,status,settle_time,lambda_hat,r_squared,observer_error,final_error\n");
}

TEST(Cli, SweepRecordsConfigErrorsAndContinues) {
  std::ostringstream csv;
  const auto cells = cmd_sweep(resolved("vehicles", {"horizon=0.2"}), "alpha3", {Json(-1.0), Json(18.0)}, csv, 2);
  ASSERT_EQ(cells.size(), 2u);
  EXPECT_EQ(cells[0].status, "config_error");
  EXPECT_EQ(cells[1].status, "not_settled");
}

TEST(Cli, SweepRejectsScenarioParameters) {
  std::ostringstream csv;
  EXPECT_EQ(code_of([&] { (void)cmd_sweep(resolved("vehicles"), "params.air_density", {Json(1.0)}, csv, 1); }),
            ErrorCode::ConfigInvalid);
}

TEST(Cli, VerifyOnlyFilter) {
  VerifyOptions opts;
  opts.only = {"control"};
  std::ostringstream out;
  EXPECT_EQ(cmd_verify(opts, out), kExitOk);
  EXPECT_NE(out.str().find("control/"), std::string::npos);
  EXPECT_EQ(out.str().find("graph/"), std::string::npos);
  EXPECT_EQ(out.str().find("[FAIL]"), std::string::npos);
}

TEST(Cli, VerifyDetectsCorruptedCost) {
  VerifyOptions opts;
  opts.only = {"game"};
  Json params = default_config("turbines").at("params");
  params["generators"][0]["gamma3"] = -1.0;
  opts.turbine_params = params;
  std::ostringstream out;
  EXPECT_EQ(cmd_verify(opts, out), kExitCheckFailed);
  EXPECT_NE(out.str().find("[FAIL] game/turbines_monotonicity"), std::string::npos) << out.str();
}

TEST(Cli, NashPrintsBothRoutes) {
  std::ostringstream out;
  EXPECT_EQ(cmd_nash(resolved("turbines"), out), kExitOk);
  EXPECT_NE(out.str().find("gap"), std::string::npos);
}
