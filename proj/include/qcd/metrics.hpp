#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

namespace qcd {

/// RMSE as reported in the benchmarks: sum (beta_hat_j - beta_j)^2 / sum beta_j^2.
/// Despite the name there is no square root; the zero vector scores exactly 1.
inline double rmse(std::span<const double> beta_hat, std::span<const double> beta_true) {
  if (beta_hat.size() != beta_true.size()) {
    throw std::invalid_argument("rmse: length mismatch");
  }
  double num = 0.0;
  double den = 0.0;
  for (std::size_t j = 0; j < beta_hat.size(); ++j) {
    const double d = beta_hat[j] - beta_true[j];
    num += d * d;
    den += beta_true[j] * beta_true[j];
  }
  if (den == 0.0) throw std::invalid_argument("rmse: beta_true is all zero");
  return num / den;
}

/// AUROC of |beta_hat_j| against support membership: the probability that a
/// uniformly random support coordinate outscores a uniformly random null
/// coordinate, ties counting 1/2 (rank-sum formulation with average ranks).
inline double auroc(std::span<const double> beta_hat, std::span<const int> support) {
  const std::size_t p = beta_hat.size();
  std::vector<bool> is_support(p, false);
  for (int j : support) {
    if (j < 0 || static_cast<std::size_t>(j) >= p) {
      throw std::invalid_argument("auroc: support index out of range");
    }
    is_support[j] = true;
  }
  std::size_t positives = 0;
  for (bool b : is_support) positives += b ? 1 : 0;
  if (positives == 0 || positives == p) {
    throw std::invalid_argument("auroc: support must be neither empty nor full");
  }

  std::vector<std::size_t> order(p);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::vector<double> score(p);
  for (std::size_t j = 0; j < p; ++j) score[j] = std::abs(beta_hat[j]);
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return score[a] < score[b]; });

  // rank sum of support coordinates, average ranks within tie groups
  double rank_sum = 0.0;
  std::size_t k = 0;
  while (k < p) {
    std::size_t end = k;
    while (end < p && score[order[end]] == score[order[k]]) ++end;
    const double avg_rank = (static_cast<double>(k + 1) + static_cast<double>(end)) / 2.0;
    for (std::size_t m = k; m < end; ++m) {
      if (is_support[order[m]]) rank_sum += avg_rank;
    }
    k = end;
  }
  const double m = static_cast<double>(positives);
  const double q = static_cast<double>(p - positives);
  return (rank_sum - m * (m + 1.0) / 2.0) / (m * q);
}

/// Stopping rule over an RMSE curve indexed by decreasing lambda: scanning in
/// order with the running minimum, returns the first index where
///   rmse[k] - min > 0.3 * (rmse[0] - min),
/// or nullopt if never triggered.
inline std::optional<std::size_t> stopping_rule(std::span<const double> curve) {
  if (curve.size() < 2) throw std::invalid_argument("stopping_rule: need >= 2 entries");
  const double first = curve[0];
  double running_min = curve[0];
  for (std::size_t k = 1; k < curve.size(); ++k) {
    running_min = std::min(running_min, curve[k]);
    if (curve[k] - running_min > 0.3 * (first - running_min)) return k;
  }
  return std::nullopt;
}

}  // namespace qcd
