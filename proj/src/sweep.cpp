#include "crashsim/sweep.hpp"

#include <charconv>
#include <cmath>
#include <limits>
#include <sstream>

#include "json.hpp"

namespace crashsim {

std::vector<double> linspace(double lo, double hi, std::size_t count) {
    if (count == 0) throw ValidationError("linspace needs at least one point");
    std::vector<double> xs(count);
    if (count == 1) {
        xs[0] = lo;
        return xs;
    }
    for (std::size_t i = 0; i + 1 < count; ++i)
        xs[i] = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(count - 1);
    xs[count - 1] = hi;
    return xs;
}

std::vector<double> default_eta_grid() { return linspace(0.0, 0.4, 41); }
std::vector<double> default_cap_grid() { return linspace(0.0, 0.6, 61); }

namespace {

void check_grid(const std::vector<double>& grid, const char* name) {
    if (grid.empty()) throw ValidationError(std::string(name) + " must be nonempty");
    for (std::size_t i = 0; i < grid.size(); ++i) {
        if (!std::isfinite(grid[i]) || grid[i] < 0.0)
            throw ValidationError(std::string(name) + " entries must be finite and >= 0");
        if (i > 0 && grid[i] <= grid[i - 1])
            throw ValidationError(std::string(name) + " must be strictly increasing");
    }
}

std::string fmt_shortest(double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

}  // namespace

const Scenario& validate_scenario(const Scenario& sc) {
    validate_params(sc.params);
    check_grid(sc.eta_grid, "eta_grid");
    check_grid(sc.n_grid, "n_grid");
    return sc;
}

GridCell evaluate_cell(const MarketParams& p, double eta, double N,
                       bool emit_zero_rate_threshold) {
    const ShortCap cap{N};
    const PosteriorBeliefs b = posterior(p);
    const Equilibrium eq = solve_equilibrium(p, cap);

    GridCell cell;
    cell.eta = eta;
    cell.N = N;
    cell.regime = eq.regime;
    cell.P1 = eq.P1;
    cell.Ps = threshold_price(p, b, cap);
    if (emit_zero_rate_threshold) cell.Ps0 = threshold_price(p, b, cap, 1.0);
    cell.gap = vacuum_gap(eq, cell.Ps);
    try {
        const DeleverageOutcome out = settle_deleverage(p, b, eq, cap, ShockParams{eta});
        cell.P2 = out.P2;
        cell.log_return = out.log_return;
        cell.clamped = out.floor_clamped;
    } catch (const NegativeFloorError& e) {
        cell.failed = true;
        cell.error = "cell (eta=" + fmt_shortest(eta) + ", N=" + fmt_shortest(N) + "): " + e.what();
    } catch (const NonpositiveP2Error& e) {
        cell.failed = true;
        cell.error = "cell (eta=" + fmt_shortest(eta) + ", N=" + fmt_shortest(N) + "): " + e.what();
    }
    return cell;
}

GridResult run_grid(const Scenario& sc) {
    validate_scenario(sc);
    const PosteriorBeliefs b = posterior(sc.params);

    GridResult result;
    result.marginals.reserve(sc.n_grid.size());
    for (double N : sc.n_grid) {
        const ShortCap cap{N};
        const Equilibrium eq = solve_equilibrium(sc.params, cap);
        MarginalRow row;
        row.N = N;
        row.regime = eq.regime;
        row.P1 = eq.P1;
        row.Ps = threshold_price(sc.params, b, cap);
        if (sc.emit_zero_rate_threshold) row.Ps0 = threshold_price(sc.params, b, cap, 1.0);
        result.marginals.push_back(std::move(row));
    }

    result.cells.reserve(sc.eta_grid.size() * sc.n_grid.size());
    for (double eta : sc.eta_grid)
        for (double N : sc.n_grid) {
            result.cells.push_back(evaluate_cell(sc.params, eta, N, sc.emit_zero_rate_threshold));
            if (result.cells.back().failed) ++result.failed_count;
        }
    return result;
}

double gap_closing_cap(const MarketParams& p) {
    validate_params(p);
    if (!(p.s > p.mu_x))
        throw NotBullishError("s must exceed mu_x for a bullish corner to exist");
    const PosteriorBeliefs b = posterior(p);
    const double d_tau = p.tau_H - p.tau_L;
    // P_H(N) = P_s(N) is affine in N; solve it exactly.
    const double c0 = p.a * b.tau_hat_L / ((1.0 - p.lambda) * p.tau_x * d_tau);
    const double c2 = p.a * b.tau_hat_H / (p.lambda * p.tau_x * d_tau);
    const double n_star = (p.s - p.mu_x - c0) / (c0 + c2);
    // Negative solution: the corner is already gone at N = 0, nothing to close.
    if (n_star < 0.0) return std::numeric_limits<double>::infinity();
    return n_star;
}

namespace {

void append_csv_cell(std::string& out, const GridCell& c) {
    out += fmt_shortest(c.eta);
    out += ',';
    out += fmt_shortest(c.N);
    out += ',';
    out += regime_name(c.regime);
    out += ',';
    out += fmt_shortest(c.P1);
    out += ',';
    out += fmt_shortest(c.Ps);
    out += ',';
    if (c.Ps0) out += fmt_shortest(*c.Ps0);
    out += ',';
    out += fmt_shortest(c.gap);
    out += ',';
    if (!c.failed) {
        out += fmt_shortest(c.P2);
        out += ',';
        out += fmt_shortest(c.log_return);
        out += ',';
        out += c.clamped ? "true" : "false";
    } else {
        out += ",,";
    }
    out += '\n';
}

nlohmann::ordered_json cell_to_json(const GridCell& c) {
    nlohmann::ordered_json j;
    j["eta"] = c.eta;
    j["N"] = c.N;
    j["regime"] = regime_name(c.regime);
    j["P1"] = c.P1;
    j["Ps"] = c.Ps;
    j["Ps0"] = c.Ps0 ? nlohmann::ordered_json(*c.Ps0) : nlohmann::ordered_json(nullptr);
    j["gap"] = c.gap;
    if (!c.failed) {
        j["P2"] = c.P2;
        j["log_return"] = c.log_return;
        j["clamped"] = c.clamped;
    } else {
        j["P2"] = nullptr;
        j["log_return"] = nullptr;
        j["clamped"] = nullptr;
        j["error"] = c.error;
    }
    return j;
}

}  // namespace

std::string emit_grid(const GridResult& result, GridFormat format) {
    if (format == GridFormat::csv) {
        std::string out = "eta,N,regime,P1,Ps,Ps0,gap,P2,log_return,clamped\n";
        for (const GridCell& c : result.cells) append_csv_cell(out, c);
        return out;
    }
    nlohmann::ordered_json root;
    auto& cells = root["cells"] = nlohmann::ordered_json::array();
    for (const GridCell& c : result.cells) cells.push_back(cell_to_json(c));
    auto& marginals = root["marginals"] = nlohmann::ordered_json::array();
    for (const MarginalRow& m : result.marginals) {
        nlohmann::ordered_json j;
        j["N"] = m.N;
        j["regime"] = regime_name(m.regime);
        j["P1"] = m.P1;
        j["Ps"] = m.Ps;
        j["Ps0"] = m.Ps0 ? nlohmann::ordered_json(*m.Ps0) : nlohmann::ordered_json(nullptr);
        marginals.push_back(std::move(j));
    }
    return root.dump(2) + "\n";
}

}  // namespace crashsim
