#pragma once

#include <string>
#include <string_view>

#include "json.hpp"

#include "crashsim/market.hpp"
#include "crashsim/sweep.hpp"

namespace crashsim {

// Canonical JSON object for MarketParams: exactly the struct's field names,
// all required, all numeric. Unknown keys are rejected.
nlohmann::ordered_json params_to_json(const MarketParams& p);
MarketParams params_from_json(const nlohmann::ordered_json& j);

// Scenario object: {"params": {...}, "eta_grid": [...], "n_grid": [...],
// "emit_zero_rate_threshold": bool}. The grids and the flag are optional;
// omitted grids fall back to the 41-point eta / 61-point cap defaults.
nlohmann::ordered_json scenario_to_json(const Scenario& sc);
Scenario scenario_from_json(const nlohmann::ordered_json& j);

// Parse + validate from text or file. Malformed JSON is rethrown as
// ValidationError carrying the parser's byte position.
Scenario parse_scenario(std::string_view text);
Scenario load_scenario_file(const std::string& path);

}  // namespace crashsim
