#pragma once

#include <algorithm>
#include <cmath>
#include <span>
#include <stdexcept>
#include <vector>

#include "qcd/core.hpp"

namespace qcd {

/// One breakpoint of the piecewise-linear coordinatewise loss.
/// Data points carry weight = |x_ij| and tau = (tau for x_ij > 0, 1 - tau for
/// x_ij < 0), the check-loss level of their term. Penalty-induced points
/// (0 and, for SCAD/MCP, +-lambda, +-a*lambda) carry weight 0.
struct Breakpoint {
  double value = 0.0;
  double weight = 0.0;
  double tau = 0.0;
};

/// Sorted breakpoints plus the derivative of the leftmost segment
/// (penalty term excluded). base_slope is always <= 0.
struct BreakpointProfile {
  std::vector<Breakpoint> points;  // nondecreasing by value
  double base_slope = 0.0;
};

/// S' = -sum_i |x_i| (tau 1{x_i > 0} + (1 - tau) 1{x_i < 0}).
inline double base_slope(std::span<const double> x_col, Quantile tau) {
  double s = 0.0;
  for (double x : x_col) {
    if (x > 0.0) {
      s -= x * tau.tau();
    } else if (x < 0.0) {
      s += x * (1.0 - tau.tau());
    }
  }
  return s;
}

/// Scaled partial residuals for coordinate j: one point per observation with
/// x_ij != 0, v = (y_i - sum_{k != j} x_ik beta_k) / x_ij, weight |x_ij|.
/// Zero entries are omitted: their summand does not involve beta_j.
inline void scaled_partial_residuals(const Dataset& data, std::span<const double> beta,
                                     int j, Quantile tau, std::vector<Breakpoint>& out) {
  if (j < 0 || j >= data.p()) throw std::invalid_argument("coordinate index out of range");
  if (beta.size() != static_cast<std::size_t>(data.p())) {
    throw std::invalid_argument("beta length does not match p");
  }
  out.clear();
  std::vector<double> resid(data.y());
  for (int k = 0; k < data.p(); ++k) {
    const double bk = beta[k];
    if (bk == 0.0) continue;
    const auto xk = data.x().col(k);
    for (int i = 0; i < data.n(); ++i) resid[i] -= xk[i] * bk;
  }
  const auto xj = data.x().col(j);
  const double bj = beta[j];
  const double t = tau.tau();
  for (int i = 0; i < data.n(); ++i) {
    const double x = xj[i];
    if (x == 0.0) continue;
    out.push_back({(resid[i] + x * bj) / x, std::abs(x), x > 0.0 ? t : 1.0 - t});
  }
}

inline std::vector<Breakpoint> scaled_partial_residuals(const Dataset& data,
                                                        std::span<const double> beta,
                                                        int j, Quantile tau) {
  std::vector<Breakpoint> out;
  scaled_partial_residuals(data, beta, j, tau, out);
  return out;
}

/// S' + sum_{i : v_i < 0} |x_i|: the derivative on the segment adjoining 0
/// from the left, before the -lambda boost.
inline double kkt_statistic(const BreakpointProfile& profile) {
  double s = profile.base_slope;
  for (const Breakpoint& b : profile.points) {
    if (b.value < 0.0) s += b.weight;
  }
  return s;
}

/// Zero-minimizer screen: the L1 coordinatewise minimizer is 0 iff
/// |S' + sum_{v_i < 0} |x_i|| <= lambda. No sorting needed.
inline bool kkt_zero_check(const BreakpointProfile& profile, double lambda) {
  return std::abs(kkt_statistic(profile)) <= lambda;
}

/// Exact minimizer of the L1-penalized coordinatewise loss.
///
/// Walks the sorted breakpoints tracking the derivative of the segment to the
/// right of each: base_slope + cumulative weight, minus lambda left of 0 and
/// plus lambda right of 0 (the 2*lambda jump lands at the zero breakpoint the
/// profile is required to contain). Returns the first breakpoint whose
/// right-segment derivative is >= 0; on an exactly flat optimal segment that
/// is the left endpoint. Empty profile (all-zero column) yields 0.
inline double coord_min_l1(const BreakpointProfile& profile, double lambda) {
  if (!(lambda >= 0.0)) throw std::invalid_argument("coord_min_l1: lambda must be >= 0");
  double cumw = 0.0;
  for (const Breakpoint& b : profile.points) {
    cumw += b.weight;
    const double side = b.value < 0.0 ? -lambda : lambda;
    if (profile.base_slope + cumw + side >= 0.0) return b.value;
  }
  return profile.points.empty() ? 0.0 : profile.points.back().value;
}

/// Derivative contribution of the MCP penalty at beta. Continuous except for
/// the 2*lambda jump at 0; the beta = 0 value is the right limit +lambda.
inline double mcp_boost(double beta, double lambda, double a) {
  if (lambda == 0.0) return 0.0;
  const double al = a * lambda;
  if (beta >= 0.0) {
    return beta < al ? lambda - beta / a : 0.0;
  }
  return beta >= -al ? -lambda - beta / a : 0.0;
}

/// Derivative contribution of the SCAD penalty at beta; right limit at 0.
inline double scad_boost(double beta, double lambda, double a) {
  if (lambda == 0.0) return 0.0;
  const double al = a * lambda;
  if (beta >= 0.0) {
    if (beta < lambda) return lambda;
    return beta <= al ? (al - beta) / (a - 1.0) : 0.0;
  }
  if (beta > -lambda) return -lambda;
  return beta >= -al ? (-al - beta) / (a - 1.0) : 0.0;
}

namespace detail {

/// Slope of the penalty boost on the segment to the right of beta. Segments
/// never straddle the thresholds {0, +-lambda, +-a lambda}: those are
/// breakpoints of the profile.
inline double boost_slope(double beta, const PenaltySpec& pen) {
  const double lambda = pen.lambda();
  if (lambda == 0.0) return 0.0;
  const double a = pen.a();
  const double al = a * lambda;
  if (pen.kind() == PenaltyKind::MCP) {
    return (beta >= -al && beta < al) ? -1.0 / a : 0.0;
  }
  const bool sloped = (beta >= -al && beta < -lambda) || (beta >= lambda && beta < al);
  return sloped ? -1.0 / (a - 1.0) : 0.0;
}

}  // namespace detail

/// Exact minimizer for MCP/SCAD.
///
/// The derivative of the segment right of each breakpoint is the cumulative
/// weight sum plus the penalty boost at the segment's left endpoint. Interior
/// zero-crossings on sloped segments are local maxima (slope -1/a resp.
/// -1/(a-1)), so every local minimum sits at a breakpoint whose right-segment
/// derivative is >= 0. Unlike the convex case the derivative sequence may
/// recross zero, so all such breakpoints are candidates; the objective is
/// tracked along the walk by integrating the piecewise-linear derivative and
/// the lowest candidate wins (leftmost on ties).
/// The profile must contain the penalty breakpoints ({0, +-a*lambda} for MCP,
/// {0, +-lambda, +-a*lambda} for SCAD) with weight 0, sorted in.
inline double coord_min_nonconvex(const BreakpointProfile& profile, const PenaltySpec& pen) {
  if (pen.kind() == PenaltyKind::L1) {
    throw std::invalid_argument("coord_min_nonconvex: penalty must be SCAD or MCP");
  }
  double total = 0.0;
  for (const Breakpoint& b : profile.points) total += b.weight;
  if (total == 0.0) return 0.0;  // all-zero column: penalty-only minimizer

  const bool is_mcp = pen.kind() == PenaltyKind::MCP;
  const double lambda = pen.lambda();
  const double a = pen.a();
  double cumw = 0.0;
  double objective = 0.0;  // relative to the first breakpoint
  double best = 0.0;
  double best_value = profile.points.front().value;
  bool have_candidate = false;
  for (std::size_t k = 0; k < profile.points.size(); ++k) {
    const Breakpoint& b = profile.points[k];
    cumw += b.weight;
    const double boost = is_mcp ? mcp_boost(b.value, lambda, a) : scad_boost(b.value, lambda, a);
    const double deriv = profile.base_slope + cumw + boost;
    if (deriv >= 0.0 && (!have_candidate || objective < best)) {
      have_candidate = true;
      best = objective;
      best_value = b.value;
    }
    if (k + 1 < profile.points.size()) {
      const double step = profile.points[k + 1].value - b.value;
      objective += deriv * step + detail::boost_slope(b.value, pen) * step * step / 2.0;
    }
  }
  return best_value;
}

/// Appends the penalty-induced zero-weight breakpoints for the given penalty.
inline void append_penalty_breakpoints(std::vector<Breakpoint>& points,
                                       const PenaltySpec& pen) {
  points.push_back({0.0, 0.0, 0.0});
  if (pen.kind() == PenaltyKind::L1) return;
  const double al = pen.a() * pen.lambda();
  points.push_back({-al, 0.0, 0.0});
  points.push_back({al, 0.0, 0.0});
  if (pen.kind() == PenaltyKind::SCAD) {
    points.push_back({-pen.lambda(), 0.0, 0.0});
    points.push_back({pen.lambda(), 0.0, 0.0});
  }
}

/// Builds the sorted derivative-tracking workspace for coordinate j at the
/// current beta (beta_j excluded from the partial residuals).
inline BreakpointProfile build_profile(const Dataset& data, std::span<const double> beta,
                                       int j, Quantile tau, const PenaltySpec& pen) {
  BreakpointProfile profile;
  scaled_partial_residuals(data, beta, j, tau, profile.points);
  profile.base_slope = base_slope(data.x().col(j), tau);
  append_penalty_breakpoints(profile.points, pen);
  std::sort(profile.points.begin(), profile.points.end(),
            [](const Breakpoint& a, const Breakpoint& b) { return a.value < b.value; });
  return profile;
}

}  // namespace qcd
