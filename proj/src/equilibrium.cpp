#include "crashsim/equilibrium.hpp"

#include <algorithm>
#include <cmath>

namespace crashsim {

const char* regime_name(Regime r) {
    switch (r) {
        case Regime::CornerH: return "CornerH";
        case Regime::CornerL: return "CornerL";
        case Regime::Interior: return "Interior";
    }
    return "?";
}

CornerPrices corner_prices(const MarketParams& p, const PosteriorBeliefs& b, ShortCap cap) {
    const double supply = 1.0 + cap.N;
    CornerPrices cp;
    cp.P_H = (b.mu_hat_H - p.a * supply / ((1.0 - p.lambda) * b.tau_hat_H)) / p.R;
    cp.P_L = (b.mu_hat_L - p.a * supply / (p.lambda * b.tau_hat_L)) / p.R;
    return cp;
}

SignalThresholds corner_thresholds(const MarketParams& p, ShortCap cap) {
    validate_params(p);
    validate_cap(cap);
    const PosteriorBeliefs b = posterior(p);
    const double d_tau = p.tau_H - p.tau_L;

    // The derivation leans on mu_hat_H - mu_hat_L collapsing to
    // tau_x * d_tau * (s - mu_x) / (tau_hat_H * tau_hat_L); keep that honest.
    const double diff_direct = b.mu_hat_H - b.mu_hat_L;
    const double diff_identity = p.tau_x * d_tau * (p.s - p.mu_x) / (b.tau_hat_H * b.tau_hat_L);
    detail::check(std::abs(diff_direct - diff_identity) <=
                      1e-9 * std::max(1.0, std::abs(diff_identity)),
                  "posterior mean spread identity");

    // s above s_high drives the L group's demand at the H-corner price down
    // to exactly -N; s_low is the mirror image for the H group.
    SignalThresholds th;
    th.s_high = p.mu_x +
                p.a * (1.0 + cap.N) * b.tau_hat_L / ((1.0 - p.lambda) * d_tau * p.tau_x) +
                p.a * cap.N * b.tau_hat_H / (p.lambda * d_tau * p.tau_x);
    th.s_low = p.mu_x -
               p.a * (1.0 + cap.N) * b.tau_hat_H / (p.lambda * d_tau * p.tau_x) -
               p.a * cap.N * b.tau_hat_L / ((1.0 - p.lambda) * d_tau * p.tau_x);
    return th;
}

Equilibrium solve_equilibrium(const MarketParams& p, ShortCap cap) {
    const SignalThresholds th = corner_thresholds(p, cap);  // validates p and cap
    const PosteriorBeliefs b = posterior(p);

    // One holding is set first and the other constructed as 1 minus it, so
    // market clearing is enforced to within one rounding of the subtraction
    // rather than depending on two independently computed demands.
    Equilibrium eq;
    if (p.s > th.s_high) {
        eq.regime = Regime::CornerH;
        eq.P1 = corner_prices(p, b, cap).P_H;
        eq.h_L = 0.0 - cap.N;  // 0 - 0 gives +0, not -0
        eq.h_H = 1.0 - eq.h_L;
    } else if (p.s < th.s_low) {
        eq.regime = Regime::CornerL;
        eq.P1 = corner_prices(p, b, cap).P_L;
        eq.h_H = 0.0 - cap.N;
        eq.h_L = 1.0 - eq.h_H;
    } else {
        eq.regime = Regime::Interior;
        const double wL = p.lambda * b.tau_hat_L;
        const double wH = (1.0 - p.lambda) * b.tau_hat_H;
        eq.P1 = (wL * b.mu_hat_L + wH * b.mu_hat_H - p.a) / (p.R * (wL + wH));
        eq.h_L = p.lambda * unconstrained_demand(b, InvestorType::L, eq.P1, p.a, p.R);
        eq.h_H = 1.0 - eq.h_L;
    }
    return eq;
}

namespace {

// Aggregate excess demand with both groups clamped at their short bound.
// Continuous and nonincreasing in price.
double clamped_excess(const MarketParams& p, const PosteriorBeliefs& b, double N, double price) {
    const double hL = p.lambda * unconstrained_demand(b, InvestorType::L, price, p.a, p.R);
    const double hH = (1.0 - p.lambda) * unconstrained_demand(b, InvestorType::H, price, p.a, p.R);
    return std::max(hL, -N) + std::max(hH, -N) - 1.0;
}

}  // namespace

Equilibrium oracle_equilibrium(const MarketParams& p, ShortCap cap) {
    validate_params(p);
    validate_cap(cap);
    const PosteriorBeliefs b = posterior(p);

    // Bracket generously around every candidate clearing price: below both
    // corner prices demand exceeds supply, above max(mu_hat)/R both groups
    // want to be at the bound.
    const double width =
        p.a / std::min(p.lambda * b.tau_hat_L, (1.0 - p.lambda) * b.tau_hat_H);
    const CornerPrices cp = corner_prices(p, b, cap);
    double lo = std::min(cp.P_L, cp.P_H) - 10.0 * width;
    double hi = std::max(b.mu_hat_L, b.mu_hat_H) / p.R + 10.0 * width;
    if (!(clamped_excess(p, b, cap.N, lo) > 0.0) || !(clamped_excess(p, b, cap.N, hi) < 0.0))
        throw BracketError("clamped excess demand does not change sign over the bracket");

    double mid = 0.5 * (lo + hi);
    double f_mid = clamped_excess(p, b, cap.N, mid);
    for (int it = 0; it < 20000 && std::abs(f_mid) >= 1e-12; ++it) {
        (f_mid > 0.0 ? lo : hi) = mid;
        const double next = 0.5 * (lo + hi);
        if (next <= lo || next >= hi) break;  // interval exhausted in floating point
        mid = next;
        f_mid = clamped_excess(p, b, cap.N, mid);
    }
    if (!(std::abs(f_mid) < 1e-12))
        throw BracketError("excess demand bisection failed to converge");

    const double hL = p.lambda * unconstrained_demand(b, InvestorType::L, mid, p.a, p.R);
    const double hH = (1.0 - p.lambda) * unconstrained_demand(b, InvestorType::H, mid, p.a, p.R);
    Equilibrium eq;
    eq.P1 = mid;
    eq.h_L = std::max(hL, -cap.N);
    eq.h_H = std::max(hH, -cap.N);
    eq.regime = (hL < -cap.N)   ? Regime::CornerH
                : (hH < -cap.N) ? Regime::CornerL
                                : Regime::Interior;
    return eq;
}

}  // namespace crashsim
