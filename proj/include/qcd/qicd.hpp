#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <span>
#include <stdexcept>
#include <vector>

#include "qcd/core.hpp"
#include "qcd/path.hpp"

namespace qcd {

/// Weighted scalar sample; weights nonnegative with positive total.
struct WeightedSample {
  std::vector<double> values;
  std::vector<double> weights;
};

/// Smallest value m whose cumulative weight reaches half the total; this
/// minimizes sum_i w_i |v_i - m| and always equals one of the input values.
inline double weighted_median(std::span<const double> values,
                              std::span<const double> weights) {
  if (values.size() != weights.size()) {
    throw std::invalid_argument("weighted_median: length mismatch");
  }
  if (values.empty()) throw std::invalid_argument("weighted_median: empty sample");
  double total = 0.0;
  for (double w : weights) {
    if (!(w >= 0.0)) throw std::invalid_argument("weighted_median: negative weight");
    total += w;
  }
  if (!(total > 0.0)) throw std::invalid_argument("weighted_median: zero total weight");

  std::vector<std::size_t> order(values.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
  const double half = total / 2.0;
  double cum = 0.0;
  for (std::size_t k : order) {
    cum += weights[k];
    if (cum >= half) return values[k];
  }
  return values[order.back()];
}

inline double weighted_median(const WeightedSample& sample) {
  return weighted_median(sample.values, sample.weights);
}

/// Approximate coordinate update of the QICD baseline: builds the n+1
/// pseudo-sample with weights frozen at the previous iterate,
///   u_ij at beta_j^(r):  v_ij - beta_j^(r) = resid_i / x_ij,
///   w_ij = (1/n) |x_ij (tau - 1{x_ij u_ij < 0})|,
/// plus the pseudo-point (value 0, weight lambda), and returns its weighted
/// median. lambda here is on the averaged-loss scale of the update's own
/// objective (1/n) sum rho + lambda |beta|.
inline double qicd_update(FitState& state, const Dataset& data, Quantile tau,
                          double lambda, int j) {
  if (!(lambda >= 0.0)) throw std::invalid_argument("qicd_update: lambda must be >= 0");
  auto& values = state.scratch_values;
  auto& weights = state.scratch_weights;
  values.clear();
  weights.clear();
  const auto xj = data.x().col(j);
  const double bj = state.beta[j];
  const double t = tau.tau();
  const double inv_n = 1.0 / static_cast<double>(data.n());
  for (int i = 0; i < data.n(); ++i) {
    const double x = xj[i];
    if (x == 0.0) continue;
    // x_ij u_ij = resid_i at the previous iterate
    const double w = inv_n * std::abs(x) * (state.resid[i] < 0.0 ? 1.0 - t : t);
    values.push_back((state.resid[i] + x * bj) / x);
    weights.push_back(w);
  }
  values.push_back(0.0);
  weights.push_back(lambda);
  double total = 0.0;
  for (double w : weights) total += w;
  if (total == 0.0) return 0.0;  // all-zero column and lambda == 0
  return weighted_median(values, weights);
}

/// One Gauss-Seidel pass with the QICD update (no KKT screen; the screen is
/// specific to the exact L1 update).
inline SweepResult qicd_sweep(FitState& state, const Dataset& data, Quantile tau,
                              double lambda) {
  SweepResult result;
  for (int j = 0; j < data.p(); ++j) {
    ++result.visits;
    const double next = qicd_update(state, data, tau, lambda, j);
    result.max_change = std::max(result.max_change, std::abs(next - state.beta[j]));
    detail::apply_coordinate_change(state, data, j, next);
  }
  return result;
}

/// Pathwise QICD baseline with the same warm-start/nudge loop and lambda grid
/// as solve_path; each grid value is passed to the update as printed. Note
/// the update's own objective averages the loss by 1/n while its pseudo-point
/// carries the full lambda, so on a shared grid the baseline is penalized
/// more heavily than the exact path.
inline SolutionPath qicd_solve_path(
    const Dataset& data, Quantile tau, const PathConfig& config,
    const std::function<bool(int, std::span<const double>)>& callback = {}) {
  const int max_sweeps = config.single_sweep ? 1 : config.max_sweeps;
  return detail::pathwise_loop(
      data, tau, config,
      [&](FitState& state, double lambda) {
        SolveDiagnostics diag;
        for (int sweep = 0; sweep < max_sweeps; ++sweep) {
          const SweepResult r = qicd_sweep(state, data, tau, lambda);
          ++diag.sweeps;
          diag.visits += r.visits;
          if (r.max_change < config.tol) {
            diag.converged = true;
            break;
          }
        }
        return diag;
      },
      callback);
}

}  // namespace qcd
