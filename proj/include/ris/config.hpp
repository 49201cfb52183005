#pragma once

#include "ris/experiment.hpp"

#include <stdexcept>
#include <string>

namespace ris {

struct ConfigError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

/// Overlays a JSON document onto the given specs. Recognized layout:
///   { "scenario": { "kind": "weak"|"strong", "bs_position": [x, y], "ris_position": [x, y],
///                   "user_center": [x, y], "user_radius", "m", "n", "k", "kappa",
///                   "sigma2_dbm", "sigma_v2_dbm", "p_total_dbm", "bs_share", "carrier_hz" },
///     "sweep":    { "variable", "values", "trials", "seed", "schemes", "max_iters", "tol_rate" } }
/// Unknown keys and wrong types raise ConfigError.
void apply_config_text(const std::string& text, ScenarioSpec& scenario, SweepSpec& sweep);
void apply_config_file(const std::string& path, ScenarioSpec& scenario, SweepSpec& sweep);

ScenarioKind parse_scenario_kind(const std::string& name);

}  // namespace ris
