#include "crashsim/json_io.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

namespace crashsim {

namespace {

constexpr const char* kParamFields[] = {"mu_x", "tau_x", "tau_L", "tau_H",
                                        "lambda", "a", "R", "s"};

bool known_param(const std::string& key) {
    return std::find(std::begin(kParamFields), std::end(kParamFields), key) !=
           std::end(kParamFields);
}

double numeric_field(const nlohmann::ordered_json& j, const char* name) {
    const auto& v = j.at(name);
    if (!v.is_number())
        throw ValidationError(std::string("params.") + name + " must be a number");
    return v.get<double>();
}

std::vector<double> grid_field(const nlohmann::ordered_json& v, const char* name) {
    if (!v.is_array())
        throw ValidationError(std::string(name) + " must be an array of numbers");
    std::vector<double> grid;
    grid.reserve(v.size());
    for (const auto& e : v) {
        if (!e.is_number())
            throw ValidationError(std::string(name) + " must be an array of numbers");
        grid.push_back(e.get<double>());
    }
    return grid;
}

}  // namespace

nlohmann::ordered_json params_to_json(const MarketParams& p) {
    nlohmann::ordered_json j;
    j["mu_x"] = p.mu_x;
    j["tau_x"] = p.tau_x;
    j["tau_L"] = p.tau_L;
    j["tau_H"] = p.tau_H;
    j["lambda"] = p.lambda;
    j["a"] = p.a;
    j["R"] = p.R;
    j["s"] = p.s;
    return j;
}

MarketParams params_from_json(const nlohmann::ordered_json& j) {
    if (!j.is_object()) throw ValidationError("params must be a JSON object");
    for (const char* f : kParamFields)
        if (!j.contains(f)) throw ValidationError(std::string("params.") + f + " is required");
    for (const auto& item : j.items())
        if (!known_param(item.key()))
            throw ValidationError("unknown params field '" + item.key() + "'");
    MarketParams p;
    p.mu_x = numeric_field(j, "mu_x");
    p.tau_x = numeric_field(j, "tau_x");
    p.tau_L = numeric_field(j, "tau_L");
    p.tau_H = numeric_field(j, "tau_H");
    p.lambda = numeric_field(j, "lambda");
    p.a = numeric_field(j, "a");
    p.R = numeric_field(j, "R");
    p.s = numeric_field(j, "s");
    return p;
}

nlohmann::ordered_json scenario_to_json(const Scenario& sc) {
    nlohmann::ordered_json j;
    j["params"] = params_to_json(sc.params);
    j["eta_grid"] = sc.eta_grid;
    j["n_grid"] = sc.n_grid;
    j["emit_zero_rate_threshold"] = sc.emit_zero_rate_threshold;
    return j;
}

Scenario scenario_from_json(const nlohmann::ordered_json& j) {
    if (!j.is_object()) throw ValidationError("scenario must be a JSON object");
    if (!j.contains("params")) throw ValidationError("scenario.params is required");
    for (const auto& item : j.items()) {
        const std::string& key = item.key();
        if (key != "params" && key != "eta_grid" && key != "n_grid" &&
            key != "emit_zero_rate_threshold")
            throw ValidationError("unknown scenario field '" + key + "'");
    }
    Scenario sc;
    sc.params = params_from_json(j.at("params"));
    sc.eta_grid = j.contains("eta_grid") ? grid_field(j.at("eta_grid"), "eta_grid")
                                         : default_eta_grid();
    sc.n_grid = j.contains("n_grid") ? grid_field(j.at("n_grid"), "n_grid")
                                     : default_cap_grid();
    if (j.contains("emit_zero_rate_threshold")) {
        const auto& flag = j.at("emit_zero_rate_threshold");
        if (!flag.is_boolean())
            throw ValidationError("emit_zero_rate_threshold must be a boolean");
        sc.emit_zero_rate_threshold = flag.get<bool>();
    }
    validate_scenario(sc);
    return sc;
}

Scenario parse_scenario(std::string_view text) {
    nlohmann::ordered_json j;
    try {
        j = nlohmann::ordered_json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw ValidationError("malformed scenario JSON at byte " + std::to_string(e.byte) +
                              ": " + e.what());
    }
    return scenario_from_json(j);
}

Scenario load_scenario_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ValidationError("cannot read scenario file '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_scenario(buf.str());
}

}  // namespace crashsim
