#pragma once

#include "crashsim/equilibrium.hpp"
#include "crashsim/market.hpp"

namespace crashsim {

// Forced-liquidation shock: a fraction eta of the date-1 position value
// P1 * (supply = 1) becomes debt that must be repaid out of sale proceeds.
struct ShockParams {
    double eta = 0.0;
};

const ShockParams& validate_shock(const ShockParams& shock);

// Price at which the L group alone is willing to absorb the whole unit supply
// while H sits at its short bound:
//   P_s = (mu_hat_L + a*N/(lambda*tau_hat_L)) / R_used
// R_used = p.R in the two-argument overload; pass 1.0 for the zero-rate
// variant used as a comparison series.
double threshold_price(const MarketParams& p, const PosteriorBeliefs& b, ShortCap cap);
double threshold_price(const MarketParams& p, const PosteriorBeliefs& b, ShortCap cap,
                       double R_used);

// max(P1 - P_s, 0): the depth of the no-bid region below the date-1 price.
double vacuum_gap(const Equilibrium& eq, double P_s);

// Lowest price with nonnegative L demand: (mu_hat_L - a/(lambda*tau_hat_L)) / R.
double price_floor(const MarketParams& p, const PosteriorBeliefs& b);

struct DeleverageOutcome {
    double P_s;          // absorption threshold at rate R
    double P_star;       // effective start of the demand-supported range, min(P1, P_s)
    double vacuum_gap;   // max(P1 - P_s, 0)
    double P2;           // settled price
    double proceeds;     // cash raised by the forced sale
    double unpaid_debt;  // shortfall when the floor binds
    bool floor_clamped;  // true when P2 hit the price floor
    double log_return;   // ln(P2) - ln(P1)
};

// Walk the forced sale down the L group's linear demand from P_star until
// debt D = eta * P1 is covered or the floor is reached. Capacity above the
// floor is M = (lambda*tau_hat_L*R / (2a)) * (P_star^2 - floor^2); when
// D <= M the settled price solves P2^2 = P_star^2 - 2*a*D/(lambda*tau_hat_L*R),
// otherwise P2 = floor, proceeds = M, and the rest of the debt goes unpaid.
// eta == 0 short-circuits to P2 = P_star with zero proceeds.
// Throws NegativeFloorError when the floor is negative.
DeleverageOutcome settle_deleverage(const MarketParams& p, const PosteriorBeliefs& b,
                                    const Equilibrium& eq, ShortCap cap, ShockParams shock);

// Independent check: trapezoid quadrature of the demand curve for capacity and
// proceeds, plus bisection for the price at which proceeds match min(D, M).
// No closed-form square root anywhere.
DeleverageOutcome oracle_settle(const MarketParams& p, const PosteriorBeliefs& b,
                                const Equilibrium& eq, ShortCap cap, ShockParams shock);

}  // namespace crashsim
