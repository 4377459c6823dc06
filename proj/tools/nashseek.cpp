// nashseek: run, inspect and verify distributed Nash-equilibrium seeking.
//
//   nashseek run    --scenario vehicles --algo output --set mu=0.01 --out out/
//   nashseek nash   --scenario turbines
//   nashseek verify --only graph --only control
//   nashseek sweep  --scenario vehicles --algo output --param mu --values 0.04,0.02,0.01

#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "nashseek/cli.hpp"
#include "nashseek/error.hpp"

namespace {

using nashseek::Json;

std::vector<std::string> split_list(const std::vector<std::string>& raw) {
  std::vector<std::string> out;
  for (const auto& item : raw) {
    std::stringstream ss(item);
    std::string part;
    while (std::getline(ss, part, ',')) {
      if (!part.empty()) out.push_back(part);
    }
  }
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Distributed Nash-equilibrium seeking over weight-unbalanced digraphs"};
  app.require_subcommand(1);

  nashseek::ConfigSources sources;
  std::string scenario;
  std::string config_file;
  std::string algo;
  std::uint64_t seed = 0;
  std::string out_path;
  std::string csv_path;
  std::vector<std::string> only;
  std::string param;
  std::vector<std::string> values;

  const auto add_config_flags = [&](CLI::App* cmd) {
    cmd->add_option("--scenario", scenario, "Built-in scenario (vehicles, turbines) or a JSON config path");
    cmd->add_option("--config", config_file, "JSON config merged over the scenario defaults");
    cmd->add_option("--set", sources.overrides, "key=value override (dotted path or alias), repeatable");
    cmd->add_option("--seed", seed, "Seed for the random initial decisions");
  };

  CLI::App* run_cmd = app.add_subcommand("run", "Simulate one closed loop and write trajectory.csv/summary.json");
  add_config_flags(run_cmd);
  run_cmd->add_option("--algo", algo, "state or output")->check(CLI::IsMember({"state", "output"}));
  run_cmd->add_option("--out", out_path, "Output directory")->default_val("out");

  CLI::App* nash_cmd = app.add_subcommand("nash", "Print the scenario's Nash equilibrium two ways");
  add_config_flags(nash_cmd);

  CLI::App* verify_cmd = app.add_subcommand("verify", "Run the property battery");
  add_config_flags(verify_cmd);
  verify_cmd->add_option("--only", only, "Restrict to groups: graph, control, game, sim (repeatable or comma list)");

  CLI::App* sweep_cmd = app.add_subcommand("sweep", "Run one simulation per parameter value");
  add_config_flags(sweep_cmd);
  sweep_cmd->add_option("--algo", algo, "state or output")->check(CLI::IsMember({"state", "output"}));
  sweep_cmd->add_option("--param", param, "Gain, observer or sim key to vary")->required();
  sweep_cmd->add_option("--values", values, "Values (repeatable or comma list)");
  sweep_cmd->add_option("--out", csv_path, "CSV file (default: stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : nashseek::kExitConfig;
  }

  if (!scenario.empty()) sources.scenario = scenario;
  if (!config_file.empty()) sources.config_file = config_file;
  if (!algo.empty()) sources.algo = algo;
  if (seed != 0) sources.seed = seed;

  try {
    if (verify_cmd->parsed()) {
      nashseek::VerifyOptions opts;
      for (const auto& g : split_list(only)) opts.only.insert(g);
      if (sources.seed) opts.seed = *sources.seed;
      if (sources.scenario || sources.config_file || !sources.overrides.empty()) {
        const Json doc = nashseek::resolve_config(sources);
        if (doc.at("scenario") == "vehicles") {
          opts.vehicle_params = doc.at("params");
        } else {
          opts.turbine_params = doc.at("params");
        }
      }
      return nashseek::cmd_verify(opts, std::cout);
    }

    const Json doc = nashseek::resolve_config(sources);
    if (run_cmd->parsed()) return nashseek::cmd_run(doc, out_path, std::cout).exit_code;
    if (nash_cmd->parsed()) return nashseek::cmd_nash(doc, std::cout);

    std::vector<Json> parsed;
    for (const auto& v : split_list(values)) {
      Json j = Json::parse(v, nullptr, false);
      parsed.push_back(j.is_discarded() ? Json(v) : j);
    }
    if (csv_path.empty()) {
      nashseek::cmd_sweep(doc, param, parsed, std::cout);
    } else {
      std::ofstream csv(csv_path);
      if (!csv) throw nashseek::Error(nashseek::ErrorCode::ConfigInvalid, "cannot write " + csv_path);
      nashseek::cmd_sweep(doc, param, parsed, csv);
    }
    return nashseek::kExitOk;
  } catch (const nashseek::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return e.code() == nashseek::ErrorCode::ConfigInvalid ? nashseek::kExitConfig : nashseek::kExitNumeric;
  }
}
