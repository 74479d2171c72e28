#pragma once

#include "crashsim/errors.hpp"

namespace crashsim {

// Primitive market parameters. The risky asset is in fixed unit supply and
// pays X ~ N(mu_x, 1/tau_x); both investor groups observe the same public
// signal s but disagree on its precision (tau_L < tau_H).
struct MarketParams {
    double mu_x;    // prior mean of the payoff
    double tau_x;   // prior precision of the payoff
    double tau_L;   // signal precision assumed by the low-confidence group
    double tau_H;   // signal precision assumed by the high-confidence group
    double lambda;  // weight of the L group in aggregate demand (1 - lambda for H)
    double a;       // CARA risk aversion
    double R;       // gross risk-free rate
    double s;       // realized public signal
};

// Throws ValidationError naming the first violated constraint:
// tau_x, tau_L, tau_H, a, R > 0; tau_L < tau_H; lambda in (0,1);
// all fields finite. Returns its argument so calls can be chained.
const MarketParams& validate_params(const MarketParams& p);

// Bayesian posterior of each group after observing s:
//   tau_hat = tau_x + tau_theta
//   mu_hat  = (tau_x * mu_x + tau_theta * s) / tau_hat
struct PosteriorBeliefs {
    double tau_hat_L;
    double tau_hat_H;
    double mu_hat_L;
    double mu_hat_H;
};

PosteriorBeliefs posterior(const MarketParams& p);

enum class InvestorType { L, H };

// Per-capita mean-variance demand y_theta(P) = (mu_hat - R*P) * tau_hat / a,
// before any short-sale constraint is applied.
double unconstrained_demand(const PosteriorBeliefs& b, InvestorType type, double price,
                            double a, double R);

// Short-sale bound: each group's aggregate position is capped below at -N.
struct ShortCap {
    double N = 0.0;
};

// Throws ValidationError unless N is finite and >= 0.
const ShortCap& validate_cap(const ShortCap& cap);

}  // namespace crashsim
