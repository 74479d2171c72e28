// Shared helpers for the test binaries: randomized parameter draws that land
// in a chosen demand regime, and a small dense linear solver used as an
// independent least-squares oracle.
#pragma once

#include <cmath>
#include <cstddef>
#include <random>
#include <stdexcept>
#include <utility>
#include <vector>

#include "crashsim/deleverage.hpp"
#include "crashsim/equilibrium.hpp"
#include "crashsim/market.hpp"

namespace testsupport {

enum class RegimeTarget { CornerH, Interior, CornerL, Any };

// The worked example used throughout the tests (same numbers as
// data/scenario.json): a bullish signal with the optimists levered up.
inline crashsim::MarketParams reference_params() {
  crashsim::MarketParams p;
  p.mu_x = 1.5;
  p.tau_x = 1.0;
  p.tau_L = 0.5;
  p.tau_H = 1.5;
  p.lambda = 0.5;
  p.a = 0.5;
  p.R = 1.05;
  p.s = 5.0;
  return p;
}

// Draw a random parameter set whose signal lands in the requested regime.
// The regime thresholds do not depend on s, so we draw everything else
// first, compute the thresholds, and then place s relative to them.
inline crashsim::MarketParams draw_market(std::mt19937_64& rng,
                                          double N,
                                          RegimeTarget target) {
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  crashsim::MarketParams p;
  p.mu_x = 0.5 + 2.5 * u01(rng);
  p.tau_x = 0.3 + 2.2 * u01(rng);
  p.tau_L = 0.2 + 1.3 * u01(rng);
  p.tau_H = p.tau_L + 0.3 + 2.0 * u01(rng);
  p.lambda = 0.15 + 0.7 * u01(rng);
  p.a = 0.1 + 1.1 * u01(rng);
  p.R = 1.0 + 0.1 * u01(rng);
  p.s = p.mu_x;  // placeholder until we know the thresholds

  const crashsim::SignalThresholds th =
      crashsim::corner_thresholds(p, crashsim::ShortCap{N});

  RegimeTarget pick = target;
  if (pick == RegimeTarget::Any) {
    const double roll = u01(rng);
    pick = roll < 1.0 / 3.0   ? RegimeTarget::CornerH
           : roll < 2.0 / 3.0 ? RegimeTarget::Interior
                              : RegimeTarget::CornerL;
  }
  switch (pick) {
    case RegimeTarget::CornerH:
      p.s = th.s_high + 0.05 + 3.0 * u01(rng);
      break;
    case RegimeTarget::CornerL:
      p.s = th.s_low - 0.05 - 3.0 * u01(rng);
      break;
    default: {
      // Strictly inside the band, away from both edges.
      const double t = 0.1 + 0.8 * u01(rng);
      p.s = th.s_low + t * (th.s_high - th.s_low);
      break;
    }
  }
  return p;
}

// Bullish draw suitable for settlement: optimists hold a nonnegative
// position and the price floor is nonnegative, so the liquidation branch is
// well posed. Rejection-samples over CornerH/Interior draws.
inline crashsim::MarketParams draw_bullish_settleable(std::mt19937_64& rng, double N) {
  for (;;) {
    const RegimeTarget t = (rng() & 1) ? RegimeTarget::CornerH : RegimeTarget::Interior;
    const crashsim::MarketParams p = draw_market(rng, N, t);
    const crashsim::PosteriorBeliefs b = crashsim::posterior(p);
    if (crashsim::price_floor(p, b) < 0.0) continue;
    const crashsim::Equilibrium eq = crashsim::solve_equilibrium(p, crashsim::ShortCap{N});
    if (eq.h_H < 0.0) continue;
    return p;
  }
}

// Solve the square system A x = b by Gauss-Jordan elimination with partial
// pivoting. A is row-major n x n. Used to cross-check the production
// Cholesky-based least-squares path with a completely different algorithm.
inline std::vector<double> gauss_jordan_solve(std::vector<double> A,
                                              std::vector<double> b,
                                              std::size_t n) {
  for (std::size_t col = 0; col < n; ++col) {
    std::size_t piv = col;
    for (std::size_t r = col + 1; r < n; ++r) {
      if (std::abs(A[r * n + col]) > std::abs(A[piv * n + col])) piv = r;
    }
    if (std::abs(A[piv * n + col]) < 1e-14) {
      throw std::runtime_error("gauss_jordan_solve: singular matrix");
    }
    if (piv != col) {
      for (std::size_t c = 0; c < n; ++c) std::swap(A[piv * n + c], A[col * n + c]);
      std::swap(b[piv], b[col]);
    }
    const double d = A[col * n + col];
    for (std::size_t c = 0; c < n; ++c) A[col * n + c] /= d;
    b[col] /= d;
    for (std::size_t r = 0; r < n; ++r) {
      if (r == col) continue;
      const double f = A[r * n + col];
      if (f == 0.0) continue;
      for (std::size_t c = 0; c < n; ++c) A[r * n + c] -= f * A[col * n + c];
      b[r] -= f * b[col];
    }
  }
  return b;
}

// Least-squares fit via the normal equations solved with Gauss-Jordan:
// an oracle for the production solver. Columns are the regressors in order;
// when intercept is set a trailing constant column is appended.
inline std::vector<double> least_squares_oracle(
    const std::vector<double>& y,
    const std::vector<std::vector<double>>& cols,
    bool intercept) {
  const std::size_t n = y.size();
  const std::size_t k = cols.size();
  const std::size_t p = k + (intercept ? 1 : 0);
  auto col_at = [&](std::size_t j, std::size_t i) -> double {
    return j < k ? cols[j][i] : 1.0;
  };
  std::vector<double> G(p * p, 0.0), rhs(p, 0.0);
  for (std::size_t j = 0; j < p; ++j) {
    for (std::size_t m = 0; m < p; ++m) {
      double acc = 0.0;
      for (std::size_t i = 0; i < n; ++i) acc += col_at(j, i) * col_at(m, i);
      G[j * p + m] = acc;
    }
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) acc += col_at(j, i) * y[i];
    rhs[j] = acc;
  }
  return gauss_jordan_solve(std::move(G), std::move(rhs), p);
}

}  // namespace testsupport
