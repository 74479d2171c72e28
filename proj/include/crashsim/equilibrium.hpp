#pragma once

#include "crashsim/market.hpp"

namespace crashsim {

// Which branch of the piecewise market-clearing solution holds.
//   CornerH: L is pinned at -N, H holds 1 + N (very bullish signal)
//   CornerL: H is pinned at -N, L holds 1 + N (very bearish signal)
//   Interior: both groups unconstrained
enum class Regime { CornerH, CornerL, Interior };

const char* regime_name(Regime r);

struct Equilibrium {
    Regime regime;
    double P1;   // market-clearing price
    double h_L;  // aggregate holding of the L group (lambda * y_L when interior)
    double h_H;  // aggregate holding of the H group
};

// Prices at which the non-pinned group alone absorbs supply 1 + N:
//   P_H = (mu_hat_H - a(1+N)/((1-lambda) tau_hat_H)) / R   (L shorted out)
//   P_L = (mu_hat_L - a(1+N)/(lambda tau_hat_L)) / R       (H shorted out)
struct CornerPrices {
    double P_H;
    double P_L;
};

CornerPrices corner_prices(const MarketParams& p, const PosteriorBeliefs& b, ShortCap cap);

// Signal cutoffs for the corner regimes: s > s_high pins L at -N,
// s < s_low pins H at -N. Ties land in the interior branch.
struct SignalThresholds {
    double s_high;
    double s_low;
};

SignalThresholds corner_thresholds(const MarketParams& p, ShortCap cap);

// Closed-form equilibrium, classified by comparing s against the thresholds.
// Holdings always satisfy h_L + h_H == 1 exactly: the pinned (or L) holding
// is set first and the other is constructed as 1 - it.
Equilibrium solve_equilibrium(const MarketParams& p, ShortCap cap);

// Independent check: bisection on aggregate excess demand
//   ED(P) = max(lambda*y_L(P), -N) + max((1-lambda)*y_H(P), -N) - 1
// with no knowledge of the closed form. Converges to |ED| < 1e-12.
Equilibrium oracle_equilibrium(const MarketParams& p, ShortCap cap);

}  // namespace crashsim
