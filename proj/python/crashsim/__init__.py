"""Deleveraging-crash market simulator.

Thin package shim over the compiled extension: two-group heterogeneous-beliefs
equilibrium, short-sale caps, forced-deleveraging settlement, grid sweeps, and
a small OLS engine.  ``MarketParams`` uses ``lambda_`` for the demand weight
because ``lambda`` is a Python keyword.
"""

from ._core import (
    DeleverageOutcome,
    Equilibrium,
    Error,
    MarketParams,
    NegativeFloorError,
    PosteriorBeliefs,
    RankDeficientError,
    Regime,
    RegressionResult,
    ValidationError,
    gap_closing_cap,
    ols,
    posterior,
    price_floor,
    settle,
    solve_equilibrium,
    sweep_csv,
    threshold_price,
    validate_params,
)

__all__ = [
    "DeleverageOutcome",
    "Equilibrium",
    "Error",
    "MarketParams",
    "NegativeFloorError",
    "PosteriorBeliefs",
    "RankDeficientError",
    "Regime",
    "RegressionResult",
    "ValidationError",
    "gap_closing_cap",
    "ols",
    "posterior",
    "price_floor",
    "settle",
    "solve_equilibrium",
    "sweep_csv",
    "threshold_price",
    "validate_params",
]
