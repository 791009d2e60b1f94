#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <functional>
#include <span>
#include <stdexcept>
#include <vector>

#include "qcd/coord_min.hpp"
#include "qcd/core.hpp"
#include "qcd/rng.hpp"

namespace qcd {

/// Pathwise solve configuration. An empty grid is auto-built from lambda_max
/// (grid_len log-spaced values down to min_ratio * lambda_max; min_ratio 0
/// selects 0.01 when n > p and 0.05 otherwise).
struct PathConfig {
  std::vector<double> grid;
  int grid_len = 100;
  double min_ratio = 0.0;
  double nudge_sigma = 0.1;  // N(0, 0.01) noise; 0 disables
  bool warm_start = true;
  bool single_sweep = false;  // exactly one sweep per lambda
  double tol = 1e-7;
  int max_sweeps = 500;
  std::uint64_t seed = 0;
  bool kkt_screen = true;
  double penalty_a = 2.2;  // shape for SCAD/MCP grids
};

struct LambdaDiagnostics {
  double lambda = 0.0;
  int sweeps = 0;
  bool converged = false;
  long long kkt_skips = 0;   // coordinate visits short-circuited by the screen
  long long visits = 0;      // total coordinate visits
  double seconds = 0.0;
};

/// Coefficients over a decreasing lambda grid, with per-lambda diagnostics.
struct SolutionPath {
  std::vector<double> lambdas;
  std::vector<Coefficients> betas;
  std::vector<LambdaDiagnostics> diagnostics;
};

/// Mutable solver workspace: current beta, cached residuals y - X beta kept
/// in sync through O(n) per-coordinate updates, a nudge RNG stream, and
/// reusable scratch buffers. One FitState per solve; never shared.
struct FitState {
  std::vector<double> beta;
  std::vector<double> resid;
  std::vector<double> base_slopes;  // S'_j per column, fixed given (X, tau)
  Rng rng;
  std::vector<Breakpoint> scratch;
  std::vector<double> scratch_values;
  std::vector<double> scratch_weights;

  FitState(const Dataset& data, Quantile tau, std::uint64_t seed)
      : beta(data.p(), 0.0), resid(data.y()), rng(seed) {
    base_slopes.reserve(data.p());
    for (int j = 0; j < data.p(); ++j) {
      base_slopes.push_back(base_slope(data.x().col(j), tau));
    }
    scratch.reserve(data.n() + 5);
  }

  /// Recomputes the residual cache from scratch (used at lambda boundaries
  /// and after any direct write to beta).
  void refresh_residuals(const Dataset& data) {
    resid = data.y();
    for (int j = 0; j < data.p(); ++j) {
      const double bj = beta[j];
      if (bj == 0.0) continue;
      const auto xj = data.x().col(j);
      for (int i = 0; i < data.n(); ++i) resid[i] -= xj[i] * bj;
    }
  }
};

struct SweepResult {
  double max_change = 0.0;
  long long visits = 0;
  long long kkt_skips = 0;
};

namespace detail {

/// Fills state.scratch with the data breakpoints of coordinate j from the
/// residual cache; returns the count (0 for an all-zero column).
inline int gather_breakpoints(FitState& state, const Dataset& data, Quantile tau, int j) {
  state.scratch.clear();
  const auto xj = data.x().col(j);
  const double bj = state.beta[j];
  const double t = tau.tau();
  for (int i = 0; i < data.n(); ++i) {
    const double x = xj[i];
    if (x == 0.0) continue;
    state.scratch.push_back(
        {(state.resid[i] + x * bj) / x, std::abs(x), x > 0.0 ? t : 1.0 - t});
  }
  return static_cast<int>(state.scratch.size());
}

inline void apply_coordinate_change(FitState& state, const Dataset& data, int j,
                                    double new_beta) {
  const double delta = new_beta - state.beta[j];
  if (delta == 0.0) return;
  state.beta[j] = new_beta;
  const auto xj = data.x().col(j);
  for (int i = 0; i < data.n(); ++i) state.resid[i] -= xj[i] * delta;
}

}  // namespace detail

/// One Gauss-Seidel pass over all coordinates with the exact update.
/// For L1 with the screen enabled, each coordinate first runs the O(n) KKT
/// zero-check and skips sorting when it passes. Returns max_j |delta beta_j|.
inline SweepResult cd_sweep(FitState& state, const Dataset& data, Quantile tau,
                            const PenaltySpec& pen, bool kkt_screen = true) {
  SweepResult result;
  const double lambda = pen.lambda();
  const bool screen = kkt_screen && pen.kind() == PenaltyKind::L1;
  for (int j = 0; j < data.p(); ++j) {
    ++result.visits;
    const double old = state.beta[j];
    double next;
    bool decided = false;
    if (screen) {
      // v_ij = (resid_i + x beta_j) / x is negative iff the numerator and x
      // have opposite signs; accumulate |x| over those observations.
      const auto xj = data.x().col(j);
      double stat = state.base_slopes[j];
      bool empty = true;
      for (int i = 0; i < data.n(); ++i) {
        const double x = xj[i];
        if (x == 0.0) continue;
        empty = false;
        const double numer = state.resid[i] + x * old;
        if ((numer < 0.0) != (x < 0.0) && numer != 0.0) stat += std::abs(x);
      }
      if (empty) {
        // all-zero column: 0 for lambda > 0, no update when lambda == 0
        next = lambda > 0.0 ? 0.0 : old;
        ++result.kkt_skips;
        decided = true;
      } else if (std::abs(stat) <= lambda) {
        next = 0.0;
        ++result.kkt_skips;
        decided = true;
      }
    }
    if (!decided) {
      const int count = detail::gather_breakpoints(state, data, tau, j);
      if (count == 0 && lambda == 0.0) {
        next = old;  // unidentified coordinate, retain
      } else {
        append_penalty_breakpoints(state.scratch, pen);
        std::sort(state.scratch.begin(), state.scratch.end(),
                  [](const Breakpoint& a, const Breakpoint& b) { return a.value < b.value; });
        BreakpointProfile profile{std::move(state.scratch), state.base_slopes[j]};
        next = pen.kind() == PenaltyKind::L1 ? coord_min_l1(profile, lambda)
                                             : coord_min_nonconvex(profile, pen);
        state.scratch = std::move(profile.points);
      }
    }
    result.max_change = std::max(result.max_change, std::abs(next - old));
    detail::apply_coordinate_change(state, data, j, next);
  }
  return result;
}

struct SolveDiagnostics {
  int sweeps = 0;
  bool converged = false;
  long long kkt_skips = 0;
  long long visits = 0;
};

/// Repeats cd_sweep until max |delta beta| < tol or max_sweeps is reached.
/// Non-convergence is reported through the flag, not an error.
inline SolveDiagnostics solve_in_place(FitState& state, const Dataset& data, Quantile tau,
                                       const PenaltySpec& pen, double tol, int max_sweeps,
                                       bool kkt_screen = true) {
  if (!(tol > 0.0)) throw std::invalid_argument("solve: tol must be > 0");
  if (max_sweeps < 1) throw std::invalid_argument("solve: max_sweeps must be >= 1");
  SolveDiagnostics diag;
  for (int sweep = 0; sweep < max_sweeps; ++sweep) {
    const SweepResult r = cd_sweep(state, data, tau, pen, kkt_screen);
    ++diag.sweeps;
    diag.kkt_skips += r.kkt_skips;
    diag.visits += r.visits;
    if (r.max_change < tol) {
      diag.converged = true;
      break;
    }
  }
  return diag;
}

inline std::pair<Coefficients, SolveDiagnostics> solve_single(
    const Dataset& data, Quantile tau, const PenaltySpec& pen,
    std::span<const double> init, double tol, int max_sweeps, bool kkt_screen = true) {
  FitState state(data, tau, 0);
  if (!init.empty()) {
    if (init.size() != static_cast<std::size_t>(data.p())) {
      throw std::invalid_argument("solve_single: init length does not match p");
    }
    state.beta.assign(init.begin(), init.end());
    state.refresh_residuals(data);
  }
  SolveDiagnostics diag = solve_in_place(state, data, tau, pen, tol, max_sweeps, kkt_screen);
  return {std::move(state.beta), diag};
}

/// Adds independent N(0, sigma^2) noise to every coordinate; sigma = 0 is the
/// identity.
inline Coefficients nudge(std::span<const double> beta, double sigma, Rng& rng) {
  if (!(sigma >= 0.0)) throw std::invalid_argument("nudge: sigma must be >= 0");
  Coefficients out(beta.begin(), beta.end());
  if (sigma == 0.0) return out;
  for (double& b : out) b += sigma * rng.normal();
  return out;
}

/// Smallest lambda for which the zero vector satisfies the KKT zero-check at
/// every coordinate: max_j |S'_j + sum_{i : v_ij < 0} |x_ij|| at beta = 0.
inline double lambda_max(const Dataset& data, Quantile tau) {
  double best = 0.0;
  for (int j = 0; j < data.p(); ++j) {
    const auto xj = data.x().col(j);
    double stat = base_slope(xj, tau);
    for (int i = 0; i < data.n(); ++i) {
      const double x = xj[i];
      if (x == 0.0) continue;
      const double y = data.y()[i];
      // v = y / x < 0 iff y and x have opposite signs
      if ((y < 0.0) != (x < 0.0) && y != 0.0) stat += std::abs(x);
    }
    best = std::max(best, std::abs(stat));
  }
  return best;
}

/// Log-spaced decreasing grid from lambda_max down to min_ratio * lambda_max.
inline std::vector<double> lambda_grid(const Dataset& data, Quantile tau, int len,
                                       double min_ratio) {
  if (len < 2) throw std::invalid_argument("lambda_grid: need at least 2 values");
  if (!(min_ratio > 0.0 && min_ratio < 1.0)) {
    throw std::invalid_argument("lambda_grid: min_ratio must lie in (0, 1)");
  }
  const double lmax = lambda_max(data, tau);
  if (lmax == 0.0) {
    throw std::invalid_argument("lambda_grid: lambda_max is 0 (degenerate dataset)");
  }
  std::vector<double> grid(len);
  for (int i = 0; i < len; ++i) {
    grid[i] = lmax * std::pow(min_ratio, static_cast<double>(i) / (len - 1));
  }
  return grid;
}

namespace detail {

inline std::vector<double> resolve_grid(const Dataset& data, Quantile tau,
                                        const PathConfig& config) {
  if (!config.grid.empty()) {
    for (std::size_t i = 0; i < config.grid.size(); ++i) {
      if (!(config.grid[i] >= 0.0)) {
        throw std::invalid_argument("PathConfig: grid entries must be >= 0");
      }
      if (i > 0 && config.grid[i] > config.grid[i - 1]) {
        throw std::invalid_argument("PathConfig: grid must be nonincreasing");
      }
    }
    return config.grid;
  }
  if (config.grid_len == 1) return {lambda_max(data, tau)};
  double ratio = config.min_ratio;
  if (ratio == 0.0) ratio = data.n() > data.p() ? 0.01 : 0.05;
  return lambda_grid(data, tau, config.grid_len, ratio);
}

/// Shared pathwise loop: warm starts, nudges, per-lambda diagnostics.
/// solve_one(state, lambda) runs the inner solver and returns diagnostics.
/// The callback sees each stored solution; returning false truncates the path.
template <class SolveOne>
SolutionPath pathwise_loop(const Dataset& data, Quantile tau, const PathConfig& config,
                           SolveOne&& solve_one,
                           const std::function<bool(int, std::span<const double>)>& callback) {
  const std::vector<double> grid = resolve_grid(data, tau, config);
  SolutionPath path;
  path.lambdas.reserve(grid.size());

  FitState state(data, tau, config.seed);
  for (std::size_t ell = 0; ell < grid.size(); ++ell) {
    if (!config.warm_start && ell > 0) {
      std::fill(state.beta.begin(), state.beta.end(), 0.0);
      state.refresh_residuals(data);
    }
    if (ell > 0 && config.nudge_sigma > 0.0) {
      state.beta = nudge(state.beta, config.nudge_sigma, state.rng);
      state.refresh_residuals(data);
    }
    const auto start = std::chrono::steady_clock::now();
    const SolveDiagnostics diag = solve_one(state, grid[ell]);
    const auto stop = std::chrono::steady_clock::now();

    path.lambdas.push_back(grid[ell]);
    path.betas.push_back(state.beta);
    path.diagnostics.push_back({grid[ell], diag.sweeps, diag.converged, diag.kkt_skips,
                                diag.visits,
                                std::chrono::duration<double>(stop - start).count()});
    if (callback && !callback(static_cast<int>(ell), path.betas.back())) break;
  }
  return path;
}

}  // namespace detail

/// Pathwise QCD (Algorithm 1): iterates the decreasing grid, stores each
/// converged solution, and warm-starts the next lambda from it plus an
/// optional random nudge. The nudge never appears in the stored path.
inline SolutionPath solve_path(
    const Dataset& data, Quantile tau, PenaltyKind kind, const PathConfig& config,
    const std::function<bool(int, std::span<const double>)>& callback = {}) {
  const int sweeps = config.single_sweep ? 1 : config.max_sweeps;
  return detail::pathwise_loop(
      data, tau, config,
      [&](FitState& state, double lambda) {
        const PenaltySpec pen = PenaltySpec::make(kind, lambda, config.penalty_a);
        return solve_in_place(state, data, tau, pen, config.tol, sweeps, config.kkt_screen);
      },
      callback);
}

}  // namespace qcd
