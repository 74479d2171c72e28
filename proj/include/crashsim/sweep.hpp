#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "crashsim/deleverage.hpp"
#include "crashsim/equilibrium.hpp"
#include "crashsim/market.hpp"

namespace crashsim {

// Evenly spaced grid: lo + (hi - lo) * i / (count - 1). Endpoints exact.
std::vector<double> linspace(double lo, double hi, std::size_t count);

std::vector<double> default_eta_grid();  // 41 points on [0, 0.4]
std::vector<double> default_cap_grid();  // 61 points on [0, 0.6]

// One sweep: fixed market parameters, a grid of shock sizes eta and short
// caps N. emit_zero_rate_threshold adds the R=1 threshold price as a
// comparison column.
struct Scenario {
    MarketParams params;
    std::vector<double> eta_grid;
    std::vector<double> n_grid;
    bool emit_zero_rate_threshold = false;
};

// Grids must be nonempty, finite, eta >= 0, N >= 0, strictly increasing.
const Scenario& validate_scenario(const Scenario& sc);

struct GridCell {
    double eta = 0.0;
    double N = 0.0;
    Regime regime = Regime::Interior;
    double P1 = 0.0;
    double Ps = 0.0;
    std::optional<double> Ps0;  // only when emit_zero_rate_threshold
    double gap = 0.0;
    double P2 = 0.0;
    double log_return = 0.0;
    bool clamped = false;
    bool failed = false;  // settlement refused (negative floor); price fields above P2 stay valid
    std::string error;
};

// Per-cap diagnostics, independent of eta.
struct MarginalRow {
    double N = 0.0;
    Regime regime = Regime::Interior;
    double P1 = 0.0;
    double Ps = 0.0;
    std::optional<double> Ps0;
};

struct GridResult {
    std::vector<GridCell> cells;  // eta-major: all caps for eta_grid[0] first
    std::vector<MarginalRow> marginals;
    std::size_t failed_count = 0;
};

// Equilibrium + settlement at a single (eta, N). Exactly what run_grid puts
// in the corresponding cell.
GridCell evaluate_cell(const MarketParams& p, double eta, double N,
                       bool emit_zero_rate_threshold);

GridResult run_grid(const Scenario& sc);

// Smallest cap that closes the vacuum gap at the corner boundary, i.e. the N
// with P_H(N) = P_s(N). Linear in N, so it has the closed form
//   N* = (s - mu_x - c0) / (c0 + c2),
//   c0 = a*tau_hat_L / ((1-lambda)*tau_x*(tau_H - tau_L)),
//   c2 = a*tau_hat_H / (lambda*tau_x*(tau_H - tau_L)).
// Requires a bullish signal (s > mu_x), else NotBullishError. Returns
// +infinity when the market is interior already at N = 0 (N* would be < 0).
double gap_closing_cap(const MarketParams& p);

enum class GridFormat { csv, json };

// Deterministic serialization; same GridResult always yields identical bytes.
// CSV columns: eta,N,regime,P1,Ps,Ps0,gap,P2,log_return,clamped. Ps0 is empty
// (CSV) or null (JSON) when not emitted; failed cells leave P2, log_return and
// clamped empty and carry the error message in JSON.
std::string emit_grid(const GridResult& result, GridFormat format);

}  // namespace crashsim
