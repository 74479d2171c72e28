#include "crashsim/market.hpp"

#include <cmath>

namespace crashsim {

namespace {

void require(bool ok, const char* msg) {
    if (!ok) throw ValidationError(msg);
}

}  // namespace

const MarketParams& validate_params(const MarketParams& p) {
    require(std::isfinite(p.mu_x), "mu_x must be finite");
    require(std::isfinite(p.tau_x) && p.tau_x > 0.0, "tau_x must be finite and > 0");
    require(std::isfinite(p.tau_L) && p.tau_L > 0.0, "tau_L must be finite and > 0");
    require(std::isfinite(p.tau_H) && p.tau_H > 0.0, "tau_H must be finite and > 0");
    require(p.tau_L < p.tau_H, "tau_L must be < tau_H");
    require(std::isfinite(p.lambda) && p.lambda > 0.0 && p.lambda < 1.0,
            "lambda must be strictly between 0 and 1");
    require(std::isfinite(p.a) && p.a > 0.0, "a must be finite and > 0");
    require(std::isfinite(p.R) && p.R > 0.0, "R must be finite and > 0");
    require(std::isfinite(p.s), "s must be finite");
    return p;
}

PosteriorBeliefs posterior(const MarketParams& p) {
    PosteriorBeliefs b;
    b.tau_hat_L = p.tau_x + p.tau_L;
    b.tau_hat_H = p.tau_x + p.tau_H;
    b.mu_hat_L = (p.tau_x * p.mu_x + p.tau_L * p.s) / b.tau_hat_L;
    b.mu_hat_H = (p.tau_x * p.mu_x + p.tau_H * p.s) / b.tau_hat_H;
    return b;
}

double unconstrained_demand(const PosteriorBeliefs& b, InvestorType type, double price,
                            double a, double R) {
    const double mu_hat = (type == InvestorType::L) ? b.mu_hat_L : b.mu_hat_H;
    const double tau_hat = (type == InvestorType::L) ? b.tau_hat_L : b.tau_hat_H;
    return (mu_hat - R * price) * tau_hat / a;
}

const ShortCap& validate_cap(const ShortCap& cap) {
    require(std::isfinite(cap.N) && cap.N >= 0.0, "N must be finite and >= 0");
    return cap;
}

}  // namespace crashsim
