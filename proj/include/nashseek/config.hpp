#pragma once

// Run configuration: built-in per-scenario defaults, JSON files merged on
// top, then dotted `key=value` overrides. A resolved document converts into
// the library types needed by sim::run.

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "nashseek/control.hpp"
#include "nashseek/scenarios.hpp"
#include "nashseek/sim.hpp"

namespace nashseek {

using Json = nlohmann::json;

/// "vehicles" | "vehicle_formation" → "vehicles"; "turbines" | "turbine_market"
/// → "turbines". Throws Error(ConfigInvalid) for anything else.
[[nodiscard]] std::string canonical_scenario_name(const std::string& name);

/// Complete default document for a scenario (gains, observer, sim block and
/// every baked-in scenario parameter).
[[nodiscard]] Json default_config(const std::string& scenario);

/// Parses JSON text; syntax errors become Error(ConfigInvalid) carrying
/// "<origin>:<line>:<column>: <message>".
[[nodiscard]] Json parse_config_text(const std::string& text, const std::string& origin = "<config>");
[[nodiscard]] Json load_config_file(const std::filesystem::path& path);

/// Applies one `key=value` override. Keys are dotted paths ("observer.mu")
/// or short aliases ("mu", "alpha1", "dt", ...). The value is parsed as JSON
/// when possible and kept as a string otherwise.
void apply_override(Json& doc, const std::string& assignment);

/// Full path for a short alias; the key itself when it is not an alias.
[[nodiscard]] std::string expand_alias(const std::string& key);

struct ConfigSources {
  /// Built-in name or path to a JSON config file.
  std::optional<std::string> scenario;
  std::optional<std::filesystem::path> config_file;
  std::optional<std::string> algo;
  std::optional<std::uint64_t> seed;
  std::vector<std::string> overrides;
};

/// defaults(scenario) ← config file ← --set overrides ← --algo/--seed, then
/// checked by validate_config. Throws Error(ConfigInvalid).
[[nodiscard]] Json resolve_config(const ConfigSources& sources);

/// Rejects unknown keys, wrong types and inconsistent values.
void validate_config(const Json& doc);

struct ResolvedRun {
  Scenario scenario;
  std::optional<FormationSpec> formation;
  GainSet gains;
  ObserverSet observer;
  SimConfig sim;
  InitialConditions init;
  double settle_tol = 1e-3;
  Json echo;
};

/// Gain and observer blocks of a document for plants of order order_n
/// ("auto" selects the binomial defaults).
[[nodiscard]] GainSet gains_from(const Json& doc, std::size_t order_n);
[[nodiscard]] ObserverSet observer_from(const Json& doc, std::size_t order_n);

/// Builds the scenario and all run parameters from a resolved document.
[[nodiscard]] ResolvedRun build_run(const Json& doc);

/// Scenario parameters from a "params" block; unspecified entries keep their
/// built-in values. With check set, invalid values throw Error(ConfigInvalid);
/// clearing it lets fault-injection checks build corrupted scenarios.
[[nodiscard]] VehicleScenarioParams vehicle_params_from(const Json& params, bool check = true);
[[nodiscard]] TurbineScenarioParams turbine_params_from(const Json& params, bool check = true);
/// {"n": N, "edges": [{"to": i, "from": j, "w": a_ij}, ...]}, 1-based.
[[nodiscard]] Digraph graph_from(const Json& spec);

}  // namespace nashseek
