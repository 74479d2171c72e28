#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "crashsim/deleverage.hpp"
#include "crashsim/econometrics.hpp"
#include "crashsim/equilibrium.hpp"
#include "crashsim/errors.hpp"
#include "crashsim/market.hpp"
#include "crashsim/sweep.hpp"

namespace py = pybind11;
using namespace pybind11::literals;

namespace {

crashsim::DeleverageOutcome settle(const crashsim::MarketParams& p, double eta, double cap) {
    const crashsim::ShortCap short_cap{cap};
    const crashsim::PosteriorBeliefs b = crashsim::posterior(crashsim::validate_params(p));
    const crashsim::Equilibrium eq = crashsim::solve_equilibrium(p, short_cap);
    return crashsim::settle_deleverage(p, b, eq, short_cap, crashsim::ShockParams{eta});
}

std::string sweep_csv(const crashsim::MarketParams& p, std::vector<double> eta_grid,
                      std::vector<double> n_grid, bool emit_zero_rate_threshold) {
    crashsim::Scenario sc;
    sc.params = p;
    sc.eta_grid = eta_grid.empty() ? crashsim::default_eta_grid() : std::move(eta_grid);
    sc.n_grid = n_grid.empty() ? crashsim::default_cap_grid() : std::move(n_grid);
    sc.emit_zero_rate_threshold = emit_zero_rate_threshold;
    return crashsim::emit_grid(crashsim::run_grid(sc), crashsim::GridFormat::csv);
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Deleveraging-crash market simulator (equilibrium, settlement, sweeps, OLS)";

    py::register_exception<crashsim::Error>(m, "Error", PyExc_RuntimeError);
    py::register_exception<crashsim::ValidationError>(m, "ValidationError", PyExc_ValueError);
    py::register_exception<crashsim::NegativeFloorError>(m, "NegativeFloorError",
                                                         PyExc_RuntimeError);
    py::register_exception<crashsim::RankDeficientError>(m, "RankDeficientError",
                                                         PyExc_ValueError);

    py::class_<crashsim::MarketParams>(m, "MarketParams")
        .def(py::init([](double mu_x, double tau_x, double tau_L, double tau_H, double lambda_,
                         double a, double R, double s) {
                 return crashsim::MarketParams{mu_x, tau_x, tau_L, tau_H, lambda_, a, R, s};
             }),
             "mu_x"_a, "tau_x"_a, "tau_L"_a, "tau_H"_a, "lambda_"_a, "a"_a, "R"_a, "s"_a)
        .def_readwrite("mu_x", &crashsim::MarketParams::mu_x)
        .def_readwrite("tau_x", &crashsim::MarketParams::tau_x)
        .def_readwrite("tau_L", &crashsim::MarketParams::tau_L)
        .def_readwrite("tau_H", &crashsim::MarketParams::tau_H)
        .def_readwrite("lambda_", &crashsim::MarketParams::lambda)
        .def_readwrite("a", &crashsim::MarketParams::a)
        .def_readwrite("R", &crashsim::MarketParams::R)
        .def_readwrite("s", &crashsim::MarketParams::s);

    py::class_<crashsim::PosteriorBeliefs>(m, "PosteriorBeliefs")
        .def_readonly("tau_hat_L", &crashsim::PosteriorBeliefs::tau_hat_L)
        .def_readonly("tau_hat_H", &crashsim::PosteriorBeliefs::tau_hat_H)
        .def_readonly("mu_hat_L", &crashsim::PosteriorBeliefs::mu_hat_L)
        .def_readonly("mu_hat_H", &crashsim::PosteriorBeliefs::mu_hat_H);

    py::enum_<crashsim::Regime>(m, "Regime")
        .value("CornerH", crashsim::Regime::CornerH)
        .value("CornerL", crashsim::Regime::CornerL)
        .value("Interior", crashsim::Regime::Interior);

    py::class_<crashsim::Equilibrium>(m, "Equilibrium")
        .def_readonly("regime", &crashsim::Equilibrium::regime)
        .def_readonly("P1", &crashsim::Equilibrium::P1)
        .def_readonly("h_L", &crashsim::Equilibrium::h_L)
        .def_readonly("h_H", &crashsim::Equilibrium::h_H);

    py::class_<crashsim::DeleverageOutcome>(m, "DeleverageOutcome")
        .def_readonly("P_s", &crashsim::DeleverageOutcome::P_s)
        .def_readonly("P_star", &crashsim::DeleverageOutcome::P_star)
        .def_readonly("vacuum_gap", &crashsim::DeleverageOutcome::vacuum_gap)
        .def_readonly("P2", &crashsim::DeleverageOutcome::P2)
        .def_readonly("proceeds", &crashsim::DeleverageOutcome::proceeds)
        .def_readonly("unpaid_debt", &crashsim::DeleverageOutcome::unpaid_debt)
        .def_readonly("floor_clamped", &crashsim::DeleverageOutcome::floor_clamped)
        .def_readonly("log_return", &crashsim::DeleverageOutcome::log_return);

    py::class_<crashsim::RegressionResult>(m, "RegressionResult")
        .def_readonly("names", &crashsim::RegressionResult::names)
        .def_readonly("coef", &crashsim::RegressionResult::coef)
        .def_readonly("se", &crashsim::RegressionResult::se)
        .def_readonly("t", &crashsim::RegressionResult::t)
        .def_readonly("stars", &crashsim::RegressionResult::stars)
        .def_readonly("f_stat", &crashsim::RegressionResult::f_stat)
        .def_readonly("r2", &crashsim::RegressionResult::r2)
        .def_readonly("r2_adj", &crashsim::RegressionResult::r2_adj)
        .def_readonly("n", &crashsim::RegressionResult::n)
        .def_readonly("k", &crashsim::RegressionResult::k)
        .def_readonly("intercept", &crashsim::RegressionResult::intercept);

    m.def(
        "validate_params",
        [](const crashsim::MarketParams& p) { return crashsim::validate_params(p); },
        "p"_a, "Check parameter constraints; raises ValidationError naming the violation");
    m.def(
        "posterior", [](const crashsim::MarketParams& p) { return crashsim::posterior(p); },
        "p"_a);
    m.def(
        "solve_equilibrium",
        [](const crashsim::MarketParams& p, double cap) {
            return crashsim::solve_equilibrium(p, crashsim::ShortCap{cap});
        },
        "p"_a, "cap"_a = 0.0);
    m.def(
        "threshold_price",
        [](const crashsim::MarketParams& p, double cap, double R_used) {
            const crashsim::PosteriorBeliefs b = crashsim::posterior(crashsim::validate_params(p));
            return R_used > 0.0
                       ? crashsim::threshold_price(p, b, crashsim::ShortCap{cap}, R_used)
                       : crashsim::threshold_price(p, b, crashsim::ShortCap{cap});
        },
        "p"_a, "cap"_a = 0.0, "R_used"_a = 0.0,
        "Price where crowded-out buyers re-enter; R_used <= 0 means use p.R");
    m.def(
        "price_floor",
        [](const crashsim::MarketParams& p) {
            return crashsim::price_floor(p, crashsim::posterior(crashsim::validate_params(p)));
        },
        "p"_a);
    m.def("settle", &settle, "p"_a, "eta"_a, "cap"_a = 0.0,
          "Equilibrium plus forced-deleveraging settlement at one (eta, cap)");
    m.def("gap_closing_cap", &crashsim::gap_closing_cap, "p"_a,
          "Smallest N closing the liquidity vacuum (inf if never open)");
    m.def("sweep_csv", &sweep_csv, "p"_a, "eta_grid"_a = std::vector<double>{},
          "n_grid"_a = std::vector<double>{}, "emit_zero_rate_threshold"_a = false,
          "Run an (eta, N) grid and return the CSV text");
    m.def(
        "ols",
        [](const std::vector<double>& y,
           const std::vector<std::pair<std::string, std::vector<double>>>& columns,
           bool intercept) {
            std::vector<crashsim::NamedColumn> x;
            x.reserve(columns.size());
            for (const auto& [name, values] : columns) x.push_back({name, values});
            return crashsim::ols(y, x, intercept);
        },
        "y"_a, "columns"_a, "intercept"_a = true,
        "Least squares of y on named (name, values) columns");
}
