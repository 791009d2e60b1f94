#pragma once

#include <cmath>
#include <vector>

#include "qcd/coord_min.hpp"
#include "qcd/core.hpp"

namespace qcd {

/// Direct evaluation of the one-coordinate objective at beta:
/// sum_k w_k rho_{tau_k}(v_k - beta) + p_lambda(|beta|).
/// Plain summation; shares nothing with the derivative-tracking minimizers.
inline double profile_objective(const BreakpointProfile& profile, double beta,
                                const PenaltySpec& pen) {
  double loss = 0.0;
  for (const Breakpoint& b : profile.points) {
    if (b.weight == 0.0) continue;
    const double u = b.value - beta;
    loss += b.weight * (u < 0.0 ? u * (b.tau - 1.0) : u * b.tau);
  }
  return loss + penalty_value(pen, beta);
}

/// Brute-force reference minimizer.
///
/// L1: the objective is convex piecewise linear, so some breakpoint attains
/// the minimum; evaluates every breakpoint and returns the leftmost argmin.
/// MCP/SCAD: each piece is linear or concave quadratic, so breakpoints still
/// attain the minimum; the candidate set additionally includes a dense grid
/// (step 1e-4) over [min v - 1, max v + 1] as a safety net against that
/// argument being wrong.
inline double oracle_coord_min(const BreakpointProfile& profile, const PenaltySpec& pen) {
  if (profile.points.empty()) return 0.0;
  double best_beta = profile.points.front().value;
  double best = profile_objective(profile, best_beta, pen);
  auto consider = [&](double candidate) {
    const double value = profile_objective(profile, candidate, pen);
    if (value < best) {
      best = value;
      best_beta = candidate;
    }
  };
  for (const Breakpoint& b : profile.points) consider(b.value);
  if (pen.kind() != PenaltyKind::L1) {
    const double lo = profile.points.front().value - 1.0;
    const double hi = profile.points.back().value + 1.0;
    const double step = 1e-4;
    const long long count = static_cast<long long>(std::ceil((hi - lo) / step));
    for (long long k = 0; k <= count; ++k) consider(lo + step * static_cast<double>(k));
  }
  return best_beta;
}

}  // namespace qcd
