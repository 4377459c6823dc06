#include "nashseek/config.hpp"

#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "nashseek/error.hpp"

namespace nashseek {

namespace {

[[noreturn]] void invalid(const std::string& msg) { throw Error(ErrorCode::ConfigInvalid, msg); }

const std::map<std::string, std::string>& aliases() {
  static const std::map<std::string, std::string> table{
      {"epsilon", "gains.epsilon"},   {"alpha1", "gains.alpha1"},     {"alpha2", "gains.alpha2"},
      {"alpha3", "gains.alpha3"},     {"k", "gains.k"},               {"mu", "observer.mu"},
      {"beta", "observer.beta"},      {"dt", "sim.dt"},               {"horizon", "sim.horizon"},
      {"seed", "sim.seed"},           {"record_stride", "sim.record_stride"},
      {"settle_tol", "sim.settle_tol"}, {"box", "sim.box"},           {"algo", "algo"},
  };
  return table;
}

const std::map<std::string, std::set<std::string>>& allowed_keys() {
  static const std::map<std::string, std::set<std::string>> table{
      {"", {"scenario", "algo", "gains", "observer", "sim", "params"}},
      {"gains", {"epsilon", "alpha1", "alpha2", "alpha3", "k"}},
      {"observer", {"mu", "beta"}},
      {"sim", {"dt", "horizon", "seed", "record_stride", "snapshot_stride", "box", "settle_tol", "x0"}},
  };
  return table;
}

const std::map<std::string, std::set<std::string>>& allowed_params() {
  static const std::map<std::string, std::set<std::string>> table{
      {"vehicles", {"vehicles", "air_density", "outer_radius", "inner_radius", "graph"}},
      {"turbines", {"generators", "price_intercept", "price_slope", "graph"}},
  };
  return table;
}

double number(const Json& doc, const std::string& section, const std::string& key) {
  if (!doc.contains(section) || !doc.at(section).is_object() || !doc.at(section).contains(key)) {
    invalid("missing config key " + section + "." + key);
  }
  const Json& v = doc.at(section).at(key);
  if (!v.is_number()) invalid(section + "." + key + " must be a number");
  return v.get<double>();
}

std::size_t count(const Json& v, const std::string& name) {
  if (!v.is_number_integer() || v.get<long long>() < 0) invalid(name + " must be a non-negative integer");
  return v.get<std::size_t>();
}

double field(const Json& obj, const char* key, const std::string& where) {
  if (!obj.contains(key) || !obj.at(key).is_number()) invalid(where + " needs numeric '" + key + "'");
  return obj.at(key).get<double>();
}

Vector vector_or_auto(const Json& v, const std::string& name, Vector fallback) {
  if (v.is_string()) {
    if (v.get<std::string>() != "auto") invalid(name + " must be \"auto\" or a list of numbers");
    return fallback;
  }
  if (!v.is_array()) invalid(name + " must be \"auto\" or a list of numbers");
  Vector out(static_cast<Eigen::Index>(v.size()));
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (!v[i].is_number()) invalid(name + " entries must be numbers");
    out(static_cast<Eigen::Index>(i)) = v[i].get<double>();
  }
  return out;
}

}  // namespace

std::string canonical_scenario_name(const std::string& name) {
  if (name == "vehicles" || name == "vehicle_formation") return "vehicles";
  if (name == "turbines" || name == "turbine_market") return "turbines";
  invalid("unknown scenario '" + name + "' (expected vehicles or turbines)");
}

Json default_config(const std::string& scenario) {
  const std::string name = canonical_scenario_name(scenario);
  Json doc;
  doc["scenario"] = name;
  doc["algo"] = "state";
  if (name == "vehicles") {
    doc["gains"] = {{"epsilon", 2.0}, {"alpha1", 3.0}, {"alpha2", 2.2}, {"alpha3", 18.0}, {"k", "auto"}};
    doc["observer"] = {{"mu", 0.02}, {"beta", "auto"}};
    doc["sim"] = {{"dt", 1e-3},           {"horizon", 60.0},  {"seed", 1},
                  {"record_stride", 50},  {"snapshot_stride", 0}, {"box", {-20.0, 20.0}},
                  {"settle_tol", 1e-3}};
    Json table = Json::array();
    for (const auto& v : vehicle_table()) {
      table.push_back({{"mass", v.mass}, {"frontal_area", v.frontal_area}, {"drag_coeff", v.drag_coeff},
                       {"mech_drag", v.mech_drag}});
    }
    const VehicleScenarioParams p = default_vehicle_params();
    doc["params"] = {{"vehicles", table}, {"air_density", p.air_density}, {"outer_radius", p.outer_radius}};
  } else {
    // k = coefficients of (s + 1.4)³: with the binomial (s + 1)³ these α
    // values leave a lightly unstable oscillatory mode in the closed loop.
    doc["gains"] = {{"epsilon", 2.0}, {"alpha1", 14.0}, {"alpha2", 10.0}, {"alpha3", 40.0},
                    {"k", {2.744, 5.88, 4.2}}};
    doc["observer"] = {{"mu", 0.01}, {"beta", "auto"}};
    doc["sim"] = {{"dt", 1e-3},          {"horizon", 60.0},  {"seed", 1},
                  {"record_stride", 50}, {"snapshot_stride", 0}, {"box", {0.0, 100.0}},
                  {"settle_tol", 1e-3}};
    Json table = Json::array();
    for (const auto& g : generator_table()) {
      table.push_back({{"gamma1", g.gamma1}, {"gamma2", g.gamma2}, {"gamma3", g.gamma3}});
    }
    const TurbineScenarioParams p = default_turbine_params();
    doc["params"] = {{"generators", table},
                     {"price_intercept", p.price_intercept},
                     {"price_slope", p.price_slope}};
  }
  return doc;
}

Json parse_config_text(const std::string& text, const std::string& origin) {
  try {
    return Json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    const std::size_t end = std::min<std::size_t>(e.byte == 0 ? 0 : e.byte - 1, text.size());
    std::size_t line = 1;
    std::size_t col = 1;
    for (std::size_t i = 0; i < end; ++i) {
      if (text[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
    std::string what = e.what();
    if (const auto pos = what.find(": "); pos != std::string::npos) what = what.substr(pos + 2);
    invalid(origin + ":" + std::to_string(line) + ":" + std::to_string(col) + ": " + what);
  }
}

Json load_config_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) invalid("cannot open config file " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_config_text(buf.str(), path.string());
}

std::string expand_alias(const std::string& key) {
  const auto it = aliases().find(key);
  return it == aliases().end() ? key : it->second;
}

void apply_override(Json& doc, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0) invalid("override '" + assignment + "' is not key=value");
  const std::string key = expand_alias(assignment.substr(0, eq));
  const std::string raw = assignment.substr(eq + 1);
  Json value = Json::parse(raw, nullptr, false);
  if (value.is_discarded()) value = raw;

  Json* node = &doc;
  std::size_t start = 0;
  while (true) {
    const auto dot = key.find('.', start);
    const std::string part = key.substr(start, dot == std::string::npos ? std::string::npos : dot - start);
    if (part.empty()) invalid("malformed override key '" + key + "'");
    Json* child = nullptr;
    if (node->is_array()) {
      if (part.find_first_not_of("0123456789") != std::string::npos || std::stoul(part) >= node->size()) {
        invalid("override key '" + key + "': '" + part + "' is not a valid index");
      }
      child = &(*node)[std::stoul(part)];
    } else {
      if (dot != std::string::npos && !node->contains(part)) (*node)[part] = Json::object();
      child = &(*node)[part];
    }
    if (dot == std::string::npos) {
      *child = std::move(value);
      return;
    }
    node = child;
    if (!node->is_object() && !node->is_array()) invalid("override key '" + key + "' descends into a scalar");
    start = dot + 1;
  }
}

Json resolve_config(const ConfigSources& sources) {
  std::optional<Json> file;
  std::optional<std::string> scenario;
  if (sources.scenario) {
    const std::filesystem::path p(*sources.scenario);
    if (p.extension() == ".json" || std::filesystem::is_regular_file(p)) {
      file = load_config_file(p);
    } else {
      scenario = *sources.scenario;
    }
  }
  if (sources.config_file) {
    Json extra = load_config_file(*sources.config_file);
    if (file) {
      file->merge_patch(extra);
    } else {
      file = std::move(extra);
    }
  }
  if (!scenario && file && file->contains("scenario")) {
    if (!file->at("scenario").is_string()) invalid("'scenario' must be a string");
    scenario = file->at("scenario").get<std::string>();
  }
  if (!scenario) invalid("no scenario given (use --scenario or a config with \"scenario\")");

  Json doc = default_config(*scenario);
  if (file) {
    if (!file->is_object()) invalid("config root must be a JSON object");
    doc.merge_patch(*file);
  }
  doc["scenario"] = canonical_scenario_name(*scenario);
  for (const auto& o : sources.overrides) apply_override(doc, o);
  if (sources.algo) doc["algo"] = *sources.algo;
  if (sources.seed) doc["sim"]["seed"] = *sources.seed;
  validate_config(doc);
  return doc;
}

void validate_config(const Json& doc) {
  if (!doc.is_object()) invalid("config root must be a JSON object");
  for (const auto& [key, value] : doc.items()) {
    if (!allowed_keys().at("").contains(key)) invalid("unknown config key '" + key + "'");
    if (const auto it = allowed_keys().find(key); it != allowed_keys().end()) {
      if (!value.is_object()) invalid("'" + key + "' must be an object");
      for (const auto& [sub, _] : value.items()) {
        if (!it->second.contains(sub)) invalid("unknown config key '" + key + "." + sub + "'");
      }
    }
  }
  if (!doc.contains("scenario") || !doc.at("scenario").is_string()) invalid("'scenario' must be a string");
  for (const auto& [section, keys] : {std::pair<const char*, std::vector<const char*>>{"gains", {"k"}},
                                      {"observer", {"beta"}},
                                      {"sim", {"record_stride", "snapshot_stride", "seed", "box"}}}) {
    if (!doc.contains(section)) invalid(std::string("missing config section '") + section + "'");
    for (const char* key : keys) {
      if (!doc.at(section).contains(key)) invalid(std::string("missing config key ") + section + "." + key);
    }
  }
  const std::string scenario = canonical_scenario_name(doc.at("scenario").get<std::string>());
  if (doc.contains("params")) {
    if (!doc.at("params").is_object()) invalid("'params' must be an object");
    for (const auto& [sub, _] : doc.at("params").items()) {
      if (!allowed_params().at(scenario).contains(sub)) invalid("unknown config key 'params." + sub + "'");
    }
  }
  if (!doc.contains("algo") || !doc.at("algo").is_string()) invalid("'algo' must be \"state\" or \"output\"");
  const std::string algo = doc.at("algo").get<std::string>();
  if (algo != "state" && algo != "output") invalid("'algo' must be \"state\" or \"output\", got '" + algo + "'");

  for (const char* key : {"epsilon", "alpha1", "alpha2", "alpha3"}) {
    if (!(number(doc, "gains", key) > 0.0)) invalid(std::string("gains.") + key + " must be positive");
  }
  if (!(number(doc, "observer", "mu") > 0.0)) invalid("observer.mu must be positive");
  const double dt = number(doc, "sim", "dt");
  const double horizon = number(doc, "sim", "horizon");
  if (!(dt > 0.0)) invalid("sim.dt must be positive");
  if (!(horizon >= dt)) invalid("sim.horizon must be at least sim.dt");
  if (count(doc.at("sim").at("record_stride"), "sim.record_stride") == 0) invalid("sim.record_stride must be >= 1");
  (void)count(doc.at("sim").at("snapshot_stride"), "sim.snapshot_stride");
  (void)count(doc.at("sim").at("seed"), "sim.seed");
  if (!(number(doc, "sim", "settle_tol") > 0.0)) invalid("sim.settle_tol must be positive");
  const Json& box = doc.at("sim").at("box");
  if (!box.is_array() || box.size() != 2 || !box[0].is_number() || !box[1].is_number() ||
      !(box[0].get<double>() < box[1].get<double>())) {
    invalid("sim.box must be [lo, hi] with lo < hi");
  }
}

Digraph graph_from(const Json& spec) {
  if (!spec.is_object() || !spec.contains("n") || !spec.contains("edges") || !spec.at("edges").is_array()) {
    invalid("graph must be {\"n\": N, \"edges\": [{\"to\": i, \"from\": j, \"w\": a}, ...]}");
  }
  const std::size_t n = count(spec.at("n"), "graph.n");
  std::vector<Edge> edges;
  for (const Json& e : spec.at("edges")) {
    const double to = field(e, "to", "graph edge");
    const double from = field(e, "from", "graph edge");
    if (to < 1 || from < 1 || to != std::floor(to) || from != std::floor(from)) {
      invalid("graph edge endpoints are 1-based integers");
    }
    edges.push_back({static_cast<std::size_t>(to) - 1, static_cast<std::size_t>(from) - 1, field(e, "w", "graph edge")});
  }
  try {
    return Digraph::from_edges(n, edges);
  } catch (const Error& e) {
    invalid(std::string("graph: ") + e.what());
  }
}

VehicleScenarioParams vehicle_params_from(const Json& params, bool check) {
  VehicleScenarioParams p = default_vehicle_params();
  if (params.contains("vehicles")) {
    p.vehicles.clear();
    for (const Json& v : params.at("vehicles")) {
      p.vehicles.push_back({field(v, "mass", "vehicle"), field(v, "frontal_area", "vehicle"),
                            field(v, "drag_coeff", "vehicle"), field(v, "mech_drag", "vehicle")});
    }
  }
  if (params.contains("air_density")) p.air_density = field(params, "air_density", "params");
  if (params.contains("outer_radius")) p.outer_radius = field(params, "outer_radius", "params");
  if (params.contains("inner_radius") && !params.at("inner_radius").is_null()) {
    p.inner_radius = field(params, "inner_radius", "params");
  }
  if (params.contains("graph") && !params.at("graph").is_null()) p.graph = graph_from(params.at("graph"));
  if (check) validate(p);
  return p;
}

TurbineScenarioParams turbine_params_from(const Json& params, bool check) {
  TurbineScenarioParams p = default_turbine_params();
  if (params.contains("generators")) {
    p.generators.clear();
    for (const Json& g : params.at("generators")) {
      p.generators.push_back({field(g, "gamma1", "generator"), field(g, "gamma2", "generator"),
                              field(g, "gamma3", "generator")});
    }
  }
  if (params.contains("price_intercept")) p.price_intercept = field(params, "price_intercept", "params");
  if (params.contains("price_slope")) p.price_slope = field(params, "price_slope", "params");
  if (params.contains("graph") && !params.at("graph").is_null()) p.graph = graph_from(params.at("graph"));
  if (check) validate(p);
  return p;
}

GainSet gains_from(const Json& doc, std::size_t order_n) {
  GainSet gains;
  gains.order_n = order_n;
  gains.epsilon = number(doc, "gains", "epsilon");
  gains.alpha1 = number(doc, "gains", "alpha1");
  gains.alpha2 = number(doc, "gains", "alpha2");
  gains.alpha3 = number(doc, "gains", "alpha3");
  if (!doc.at("gains").contains("k")) invalid("missing config key gains.k");
  gains.k = vector_or_auto(doc.at("gains").at("k"), "gains.k", default_hurwitz_gains(order_n));
  return gains;
}

ObserverSet observer_from(const Json& doc, std::size_t order_n) {
  ObserverSet obs;
  obs.mu = number(doc, "observer", "mu");
  if (!doc.at("observer").contains("beta")) invalid("missing config key observer.beta");
  obs.beta = vector_or_auto(doc.at("observer").at("beta"), "observer.beta", default_observer_gains(order_n));
  return obs;
}

ResolvedRun build_run(const Json& doc) {
  validate_config(doc);
  const std::string name = canonical_scenario_name(doc.at("scenario").get<std::string>());
  const Json params = doc.value("params", Json::object());

  std::optional<FormationSpec> formation;
  std::optional<Scenario> scenario;
  if (name == "vehicles") {
    VehicleScenario vs = build_vehicle_formation(vehicle_params_from(params));
    formation = std::move(vs.formation);
    scenario.emplace(std::move(vs.scenario));
  } else {
    const TurbineScenarioParams tp = turbine_params_from(params);
    try {
      scenario.emplace(build_turbine_market(tp));
    } catch (const Error& e) {
      if (e.code() == ErrorCode::SingularSystem) invalid(e.what());
      throw;
    }
  }

  GainSet gains = gains_from(doc, scenario->order_n);
  ObserverSet obs = observer_from(doc, scenario->order_n);

  SimConfig sim;
  sim.dt = number(doc, "sim", "dt");
  sim.horizon = number(doc, "sim", "horizon");
  sim.mode = doc.at("algo").get<std::string>() == "output" ? Mode::OutputBased : Mode::StateBased;
  sim.record_stride = doc.at("sim").at("record_stride").get<std::size_t>();
  sim.snapshot_stride = doc.at("sim").at("snapshot_stride").get<std::size_t>();
  sim.seed = doc.at("sim").at("seed").get<std::uint64_t>();

  InitialConditions init;
  init.box_lo = doc.at("sim").at("box")[0].get<double>();
  init.box_hi = doc.at("sim").at("box")[1].get<double>();
  if (doc.at("sim").contains("x0") && !doc.at("sim").at("x0").is_null()) {
    const Vector x0 = vector_or_auto(doc.at("sim").at("x0"), "sim.x0", Vector());
    if (x0.size() != static_cast<Eigen::Index>(scenario->game.players() * scenario->game.dim())) {
      invalid("sim.x0 must have N*m entries");
    }
    init.decisions = x0;
  }

  try {
    validate(gains);
    if (sim.mode == Mode::OutputBased) validate(obs, gains.order_n);
  } catch (const Error& e) {
    invalid(std::string("gains: ") + e.what());
  }

  return ResolvedRun{std::move(*scenario), std::move(formation), std::move(gains), std::move(obs),
                     sim,                  std::move(init),      number(doc, "sim", "settle_tol"), doc};
}

}  // namespace nashseek
