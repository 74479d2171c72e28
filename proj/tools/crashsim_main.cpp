#include <charconv>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "crashsim/deleverage.hpp"
#include "crashsim/econometrics.hpp"
#include "crashsim/equilibrium.hpp"
#include "crashsim/errors.hpp"
#include "crashsim/json_io.hpp"
#include "crashsim/market.hpp"
#include "crashsim/sweep.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitValidation = 2;
constexpr int kExitNegativeFloor = 3;
constexpr int kExitFailedCells = 4;
constexpr int kExitRankDeficient = 5;

std::string fmt6(double v) {
    char buf[48];
    std::snprintf(buf, sizeof buf, "%.6g", v);
    return buf;
}

std::string fmt_shortest(double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

void write_output(const std::string& out_path, const std::string& content) {
    if (out_path.empty()) {
        std::fwrite(content.data(), 1, content.size(), stdout);
        return;
    }
    std::ofstream out(out_path, std::ios::binary);
    if (!out) throw crashsim::ValidationError("cannot write to '" + out_path + "'");
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) throw crashsim::ValidationError("cannot write to '" + out_path + "'");
}

struct SolveArgs {
    std::string scenario_path;
    double eta = 0.0;
    double cap = 0.0;
    std::string format = "table";
    std::string out_path;
};

int cmd_solve(const SolveArgs& args) {
    const crashsim::Scenario sc = crashsim::load_scenario_file(args.scenario_path);
    const crashsim::MarketParams& p = sc.params;
    const crashsim::ShortCap cap{args.cap};
    const crashsim::PosteriorBeliefs b = crashsim::posterior(p);
    const crashsim::Equilibrium eq = crashsim::solve_equilibrium(p, cap);
    const crashsim::DeleverageOutcome out =
        crashsim::settle_deleverage(p, b, eq, cap, crashsim::ShockParams{args.eta});

    std::string text;
    if (args.format == "json") {
        nlohmann::ordered_json j;
        j["regime"] = crashsim::regime_name(eq.regime);
        j["P1"] = eq.P1;
        j["h_L"] = eq.h_L;
        j["h_H"] = eq.h_H;
        j["P_s"] = out.P_s;
        j["gap"] = out.vacuum_gap;
        j["P2"] = out.P2;
        j["log_return"] = out.log_return;
        j["proceeds"] = out.proceeds;
        j["unpaid_debt"] = out.unpaid_debt;
        j["floor_clamped"] = out.floor_clamped;
        text = j.dump(2) + "\n";
    } else {
        const auto line = [&text](const char* label, const std::string& value) {
            text += label;
            text += value;
            text += '\n';
        };
        line("regime       ", crashsim::regime_name(eq.regime));
        line("P1           ", fmt6(eq.P1));
        line("h_L          ", fmt6(eq.h_L));
        line("h_H          ", fmt6(eq.h_H));
        line("P_s          ", fmt6(out.P_s));
        line("gap          ", fmt6(out.vacuum_gap));
        line("P2           ", fmt6(out.P2));
        line("log_return   ", fmt6(out.log_return));
        line("proceeds     ", fmt6(out.proceeds));
        line("unpaid_debt  ", fmt6(out.unpaid_debt));
        line("floor_clamped", out.floor_clamped ? " true" : " false");
    }
    write_output(args.out_path, text);
    return kExitOk;
}

struct SweepArgs {
    std::string scenario_path;
    std::string format = "csv";
    std::string out_path;
};

int cmd_sweep(const SweepArgs& args) {
    const crashsim::Scenario sc = crashsim::load_scenario_file(args.scenario_path);
    const crashsim::GridResult result = crashsim::run_grid(sc);
    const crashsim::GridFormat format =
        args.format == "json" ? crashsim::GridFormat::json : crashsim::GridFormat::csv;
    write_output(args.out_path, crashsim::emit_grid(result, format));

    // Summary goes to stdout unless the grid itself went there.
    std::ostream& os = args.out_path.empty() ? std::cerr : std::cout;
    os << "cells: " << result.cells.size() << " (failed: " << result.failed_count << ")\n";
    const crashsim::GridCell* min_cell = nullptr;
    const crashsim::GridCell* max_cell = nullptr;
    for (const crashsim::GridCell& c : result.cells) {
        if (c.failed) continue;
        if (!min_cell || c.log_return < min_cell->log_return) min_cell = &c;
        if (!max_cell || c.log_return > max_cell->log_return) max_cell = &c;
    }
    if (min_cell && max_cell) {
        os << "min log_return = " << fmt6(min_cell->log_return) << " at (eta="
           << fmt6(min_cell->eta) << ", N=" << fmt6(min_cell->N) << ")\n";
        os << "max log_return = " << fmt6(max_cell->log_return) << " at (eta="
           << fmt6(max_cell->eta) << ", N=" << fmt6(max_cell->N) << ")\n";
    }
    if (result.failed_count > 0) {
        std::size_t shown = 0;
        for (const crashsim::GridCell& c : result.cells) {
            if (!c.failed) continue;
            if (shown < 20) std::cerr << c.error << "\n";
            ++shown;
        }
        if (shown > 20) std::cerr << "... and " << (shown - 20) << " more failed cells\n";
        return kExitFailedCells;
    }
    return kExitOk;
}

struct RegressArgs {
    std::string csv_path;
    std::vector<std::string> specs;
    std::string format = "table";
    std::string out_path;
};

int cmd_regress(const RegressArgs& args) {
    const crashsim::ObservationTable table = crashsim::load_observations_file(args.csv_path);
    std::vector<std::string> specs = args.specs;
    if (specs.empty()) specs = {"factors", "liquidity", "all"};

    std::vector<std::string> names;
    std::vector<crashsim::RegressionResult> results;
    for (const std::string& spec : specs) {
        crashsim::RegressorSet set;
        if (spec == "factors") {
            set = crashsim::RegressorSet::Factors;
        } else if (spec == "liquidity") {
            set = crashsim::RegressorSet::Liquidity;
        } else if (spec == "all") {
            set = crashsim::RegressorSet::All;
        } else {
            throw crashsim::ValidationError("unknown regression spec '" + spec +
                                            "' (expected factors, liquidity, or all)");
        }
        names.push_back(spec);
        results.push_back(crashsim::run_observation_regression(table, set));
    }

    std::string text;
    if (args.format == "json") {
        nlohmann::ordered_json root;
        for (std::size_t i = 0; i < results.size(); ++i)
            root[names[i]] =
                nlohmann::ordered_json::parse(crashsim::regression_to_json(results[i]));
        text = root.dump(2) + "\n";
    } else {
        text = crashsim::format_table(results);
    }
    write_output(args.out_path, text);
    return kExitOk;
}

struct SmoothArgs {
    std::string csv_path;
    double span = 0.5;
    std::string grid = "25x25";
    std::string out_path;
};

int cmd_smooth(const SmoothArgs& args) {
    const crashsim::ObservationTable table = crashsim::load_observations_file(args.csv_path);

    crashsim::SmoothSpec spec;
    spec.span = args.span;
    const auto parse_dim = [](const std::string& text, std::size_t& dim) {
        unsigned long v = 0;
        const auto res = std::from_chars(text.data(), text.data() + text.size(), v);
        if (res.ec != std::errc() || res.ptr != text.data() + text.size()) return false;
        if (v < 2 || v > 1000) return false;
        dim = v;
        return true;
    };
    const std::size_t sep = args.grid.find('x');
    if (sep == std::string::npos || !parse_dim(args.grid.substr(0, sep), spec.grid_x1) ||
        !parse_dim(args.grid.substr(sep + 1), spec.grid_x2))
        throw crashsim::ValidationError("--grid must look like 25x25 with dims in [2, 1000] (got '" +
                                        args.grid + "')");

    std::vector<crashsim::SurfacePoint> pts;
    pts.reserve(table.size());
    for (const crashsim::Observation& o : table.rows)
        pts.push_back({o.leverage_ratio, o.short_sale_ratio, o.log_return});
    const crashsim::SurfaceFit fit = crashsim::lowess_surface(pts, spec);

    std::string text = "leverage_ratio,short_sale_ratio,fitted_log_return\n";
    for (std::size_t i = 0; i < fit.x1_nodes.size(); ++i)
        for (std::size_t j = 0; j < fit.x2_nodes.size(); ++j) {
            text += fmt_shortest(fit.x1_nodes[i]);
            text += ',';
            text += fmt_shortest(fit.x2_nodes[j]);
            text += ',';
            text += fmt_shortest(fit.values[i * fit.x2_nodes.size() + j]);
            text += '\n';
        }
    write_output(args.out_path, text);
    if (fit.degenerate_count > 0)
        std::cerr << fit.degenerate_count
                  << " grid node(s) had degenerate neighborhoods; fell back to weighted means\n";
    return kExitOk;
}

struct ValidateArgs {
    std::string scenario_path;
    std::string csv_path;
};

int cmd_validate(const ValidateArgs& args) {
    if (args.scenario_path.empty() == args.csv_path.empty())
        throw crashsim::ValidationError(
            "validate needs exactly one input: --scenario FILE or an observations CSV path");
    if (!args.scenario_path.empty()) {
        const crashsim::Scenario sc = crashsim::load_scenario_file(args.scenario_path);
        std::cout << "scenario OK: " << sc.eta_grid.size() << "x" << sc.n_grid.size()
                  << " grid, " << sc.eta_grid.size() * sc.n_grid.size() << " cells\n";
    } else {
        const crashsim::ObservationTable table =
            crashsim::load_observations_file(args.csv_path);
        std::cout << "observations OK: " << table.size() << " rows\n";
    }
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Deleveraging-crash simulator: equilibrium prices, settlement sweeps, and "
                 "cross-sectional regressions"};
    app.require_subcommand(1);

    SolveArgs solve_args;
    CLI::App* solve = app.add_subcommand("solve", "Solve one (eta, N) settlement");
    solve->add_option("--scenario", solve_args.scenario_path, "Scenario JSON file")
        ->required();
    solve->add_option("--eta", solve_args.eta, "Leverage shock (debt = eta * P1)");
    solve->add_option("--cap", solve_args.cap, "Short-sale cap N");
    solve->add_option("--format", solve_args.format, "table or json")
        ->check(CLI::IsMember({"table", "json"}));
    solve->add_option("--out", solve_args.out_path, "Output file (default stdout)");

    SweepArgs sweep_args;
    CLI::App* sweep = app.add_subcommand("sweep", "Run the full (eta, N) grid");
    sweep->add_option("--scenario", sweep_args.scenario_path, "Scenario JSON file")
        ->required();
    sweep->add_option("--format", sweep_args.format, "csv or json")
        ->check(CLI::IsMember({"csv", "json"}));
    sweep->add_option("--out", sweep_args.out_path, "Output file (default stdout)");

    RegressArgs regress_args;
    CLI::App* regress = app.add_subcommand("regress", "Cross-sectional OLS on observations");
    regress->add_option("csv", regress_args.csv_path, "Observations CSV file")->required();
    regress
        ->add_option("--spec", regress_args.specs,
                     "Regressor sets to run (factors, liquidity, all); default: all three")
        ->check(CLI::IsMember({"factors", "liquidity", "all"}));
    regress->add_option("--format", regress_args.format, "table or json")
        ->check(CLI::IsMember({"table", "json"}));
    regress->add_option("--out", regress_args.out_path, "Output file (default stdout)");

    SmoothArgs smooth_args;
    CLI::App* smooth = app.add_subcommand("smooth", "Local-plane surface of log_return");
    smooth->add_option("csv", smooth_args.csv_path, "Observations CSV file")->required();
    smooth->add_option("--span", smooth_args.span, "Neighborhood fraction in (0, 1]");
    smooth->add_option("--grid", smooth_args.grid, "Output grid dims, e.g. 25x25");
    smooth->add_option("--out", smooth_args.out_path, "Output file (default stdout)");

    ValidateArgs validate_args;
    CLI::App* validate = app.add_subcommand("validate", "Check inputs without writing");
    validate->add_option("--scenario", validate_args.scenario_path, "Scenario JSON file");
    validate->add_option("csv", validate_args.csv_path, "Observations CSV file");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitValidation;
    }

    try {
        if (solve->parsed()) return cmd_solve(solve_args);
        if (sweep->parsed()) return cmd_sweep(sweep_args);
        if (regress->parsed()) return cmd_regress(regress_args);
        if (smooth->parsed()) return cmd_smooth(smooth_args);
        if (validate->parsed()) return cmd_validate(validate_args);
    } catch (const crashsim::RankDeficientError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitRankDeficient;
    } catch (const crashsim::NegativeFloorError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitNegativeFloor;
    } catch (const crashsim::NonpositiveP2Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitNegativeFloor;
    } catch (const crashsim::ValidationError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitValidation;
    } catch (const crashsim::CsvError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitValidation;
    } catch (const crashsim::TooFewObservationsError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitValidation;
    } catch (const crashsim::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitValidation;
    } catch (const std::exception& e) {
        std::cerr << "unexpected error: " << e.what() << "\n";
        return 1;
    }
    return kExitOk;
}
