#include "crashsim/deleverage.hpp"

#include <algorithm>
#include <cmath>

namespace crashsim {

const ShockParams& validate_shock(const ShockParams& shock) {
    if (!(std::isfinite(shock.eta) && shock.eta >= 0.0))
        throw ValidationError("eta must be finite and >= 0");
    return shock;
}

double threshold_price(const MarketParams& p, const PosteriorBeliefs& b, ShortCap cap,
                       double R_used) {
    if (!(std::isfinite(R_used) && R_used > 0.0))
        throw ValidationError("R_used must be finite and > 0");
    return (b.mu_hat_L + p.a * cap.N / (p.lambda * b.tau_hat_L)) / R_used;
}

double threshold_price(const MarketParams& p, const PosteriorBeliefs& b, ShortCap cap) {
    return threshold_price(p, b, cap, p.R);
}

double vacuum_gap(const Equilibrium& eq, double P_s) {
    return std::max(eq.P1 - P_s, 0.0);
}

double price_floor(const MarketParams& p, const PosteriorBeliefs& b) {
    return (b.mu_hat_L - p.a / (p.lambda * b.tau_hat_L)) / p.R;
}

DeleverageOutcome settle_deleverage(const MarketParams& p, const PosteriorBeliefs& b,
                                    const Equilibrium& eq, ShortCap cap, ShockParams shock) {
    validate_shock(shock);
    DeleverageOutcome out;
    out.P_s = threshold_price(p, b, cap);
    out.P_star = std::min(eq.P1, out.P_s);
    out.vacuum_gap = vacuum_gap(eq, out.P_s);

    const double floor = price_floor(p, b);
    if (floor < 0.0)
        throw NegativeFloorError("price floor is negative; reparameterize before settling");

    const double debt = shock.eta * eq.P1;
    // Slope of the L group's aggregate demand in price; proceeds from selling
    // from price u down to v along that schedule are (slope/2)(u^2 - v^2).
    const double slope = p.lambda * b.tau_hat_L * p.R / p.a;
    // Clamp logic before any square root: the quadratic for P2 goes negative
    // once the debt exceeds what the schedule can absorb above the floor.
    const double capacity = 0.5 * slope * (out.P_star * out.P_star - floor * floor);

    if (debt == 0.0) {
        // No liquidation: the price only free-falls through the vacuum (if any).
        out.P2 = out.P_star;
        out.proceeds = 0.0;
        out.unpaid_debt = 0.0;
        out.floor_clamped = false;
    } else if (debt <= capacity) {
        out.P2 = std::sqrt(out.P_star * out.P_star - 2.0 * debt / slope);
        out.proceeds = debt;
        out.unpaid_debt = 0.0;
        out.floor_clamped = false;
    } else {
        out.P2 = floor;
        out.proceeds = capacity;
        out.unpaid_debt = debt - capacity;
        out.floor_clamped = true;
    }

    if (!(out.P2 > 0.0)) throw NonpositiveP2Error("settled price is not positive");
    out.log_return = std::log(out.P2) - std::log(eq.P1);
    return out;
}

namespace {

// Proceeds slope * integral of price over [lo, hi], by trapezoid panels.
// The integrand is linear, so this is exact up to rounding, but it shares no
// algebra with the closed form above.
double quad_proceeds(double slope, double lo, double hi, int panels) {
    if (hi <= lo) return 0.0;
    const double h = (hi - lo) / panels;
    double acc = 0.5 * (lo + hi);
    for (int i = 1; i < panels; ++i) acc += lo + i * h;
    return slope * acc * h;
}

}  // namespace

DeleverageOutcome oracle_settle(const MarketParams& p, const PosteriorBeliefs& b,
                                const Equilibrium& eq, ShortCap cap, ShockParams shock) {
    validate_shock(shock);
    constexpr int kPanels = 10000;

    DeleverageOutcome out;
    out.P_s = threshold_price(p, b, cap);
    out.P_star = std::min(eq.P1, out.P_s);
    out.vacuum_gap = vacuum_gap(eq, out.P_s);

    const double floor = price_floor(p, b);
    if (floor < 0.0)
        throw NegativeFloorError("price floor is negative; reparameterize before settling");

    const double debt = shock.eta * eq.P1;
    const double slope = p.lambda * b.tau_hat_L * p.R / p.a;
    const double capacity = quad_proceeds(slope, floor, out.P_star, kPanels);

    if (debt == 0.0) {
        out.P2 = out.P_star;
        out.proceeds = 0.0;
        out.unpaid_debt = 0.0;
        out.floor_clamped = false;
    } else if (debt > capacity) {
        out.P2 = floor;
        out.proceeds = capacity;
        out.unpaid_debt = debt - capacity;
        out.floor_clamped = true;
    } else {
        // Find the stop price whose cumulative proceeds pay the debt.
        double lo = floor, hi = out.P_star;
        for (int it = 0; it < 80 && hi - lo > 1e-12 * std::max(1.0, hi); ++it) {
            const double mid = 0.5 * (lo + hi);
            const double got = quad_proceeds(slope, mid, out.P_star, kPanels);
            (got > debt ? lo : hi) = mid;
        }
        out.P2 = 0.5 * (lo + hi);
        out.proceeds = debt;
        out.unpaid_debt = 0.0;
        out.floor_clamped = false;
    }

    if (!(out.P2 > 0.0)) throw NonpositiveP2Error("settled price is not positive");
    out.log_return = std::log(out.P2) - std::log(eq.P1);
    return out;
}

}  // namespace crashsim
