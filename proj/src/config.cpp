#include "ris/config.hpp"

#include <nlohmann/json.hpp>

#include <fstream>
#include <sstream>

namespace ris {

namespace {

using nlohmann::json;

template <class T>
T get_as(const json& j, const std::string& key) {
  try {
    return j.get<T>();
  } catch (const json::exception&) {
    throw ConfigError("config key '" + key + "' has the wrong type");
  }
}

Point2 get_point(const json& j, const std::string& key) {
  const auto v = get_as<std::vector<double>>(j, key);
  if (v.size() != 2) throw ConfigError("config key '" + key + "' must be [x, y]");
  return {v[0], v[1]};
}

void apply_scenario(const json& j, ScenarioSpec& s) {
  if (!j.is_object()) throw ConfigError("'scenario' must be an object");
  for (const auto& [key, value] : j.items()) {
    if (key == "kind") s.scenario = parse_scenario_kind(get_as<std::string>(value, key));
    else if (key == "bs_position") s.bs_position = get_point(value, key);
    else if (key == "ris_position") s.ris_position = get_point(value, key);
    else if (key == "user_center") s.user_center = get_point(value, key);
    else if (key == "user_radius") s.user_radius = get_as<double>(value, key);
    else if (key == "m") s.m = get_as<int>(value, key);
    else if (key == "n") s.n = get_as<int>(value, key);
    else if (key == "k") s.k = get_as<int>(value, key);
    else if (key == "kappa") s.kappa = get_as<double>(value, key);
    else if (key == "sigma2_dbm") s.sigma2_dbm = get_as<double>(value, key);
    else if (key == "sigma_v2_dbm") s.sigma_v2_dbm = get_as<double>(value, key);
    else if (key == "p_total_dbm") s.p_total_dbm = get_as<double>(value, key);
    else if (key == "bs_share") s.bs_share = get_as<double>(value, key);
    else if (key == "carrier_hz") s.carrier_hz = get_as<double>(value, key);
    else throw ConfigError("unknown scenario key '" + key + "'");
  }
}

void apply_sweep(const json& j, SweepSpec& s) {
  if (!j.is_object()) throw ConfigError("'sweep' must be an object");
  for (const auto& [key, value] : j.items()) {
    try {
      if (key == "variable") s.variable = parse_variable(get_as<std::string>(value, key));
      else if (key == "values") s.values = get_as<std::vector<double>>(value, key);
      else if (key == "trials") s.trials = get_as<int>(value, key);
      else if (key == "seed") s.seed = get_as<std::uint64_t>(value, key);
      else if (key == "schemes") {
        s.schemes.clear();
        for (const auto& name : get_as<std::vector<std::string>>(value, key)) s.schemes.push_back(parse_scheme(name));
      } else if (key == "max_iters") s.solver.max_iters = get_as<int>(value, key);
      else if (key == "tol_rate") s.solver.tol_rate = get_as<double>(value, key);
      else throw ConfigError("unknown sweep key '" + key + "'");
    } catch (const ConfigError&) {
      throw;
    } catch (const std::invalid_argument& e) {
      throw ConfigError(e.what());
    }
  }
}

}  // namespace

ScenarioKind parse_scenario_kind(const std::string& name) {
  if (name == "weak") return ScenarioKind::WeakDirect;
  if (name == "strong") return ScenarioKind::StrongDirect;
  throw ConfigError("unknown scenario '" + name + "' (expected weak or strong)");
}

void apply_config_text(const std::string& text, ScenarioSpec& scenario, SweepSpec& sweep) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  if (!doc.is_object()) throw ConfigError("config must be a JSON object");
  for (const auto& [key, value] : doc.items()) {
    if (key == "scenario") apply_scenario(value, scenario);
    else if (key == "sweep") apply_sweep(value, sweep);
    else throw ConfigError("unknown top-level key '" + key + "'");
  }
}

void apply_config_file(const std::string& path, ScenarioSpec& scenario, SweepSpec& sweep) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file '" + path + "'");
  std::ostringstream text;
  text << in.rdbuf();
  apply_config_text(text.str(), scenario, sweep);
}

}  // namespace ris
