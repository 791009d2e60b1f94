#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <utility>
#include <vector>

#include "qcd/core.hpp"
#include "qcd/normal.hpp"
#include "qcd/rng.hpp"

namespace qcd {

/// Simulation protocol parameters: AR(1)-correlated Gaussian design with
/// rho = 0.5, first column mapped through the standard normal CDF, and
/// heteroskedastic response on the support {1, 6, 12, 15, 20} (1-based).
struct SimSpec {
  int p = 100;
  int n = 300;
  Quantile tau{0.3};
  std::uint64_t seed = 1;
  double rho = 0.5;
};

struct GroundTruth {
  Coefficients beta_true;
  std::vector<int> support;  // 0-based column indices
};

/// Draws X~ ~ N_p(0, Sigma) with sigma_ik = rho^|i-k| via the AR(1) recursion
/// X~_k = rho X~_{k-1} + sqrt(1 - rho^2) Z_k (exact covariance, O(np)), sets
/// X_1 = Phi(X~_1), X_i = X~_i, and builds
///   Y = X_6 + X_12 + X_15 + X_20 + 0.7 X_1 eps,  eps ~ N(0, 1),
/// so beta_1 = 0.7 Phi^{-1}(tau) and beta_6 = beta_12 = beta_15 = beta_20 = 1.
inline std::pair<Dataset, GroundTruth> generate_dataset(const SimSpec& spec) {
  if (spec.p < 20) {
    throw std::invalid_argument(
        "generate_dataset: p must be >= 20 so the support {1, 6, 12, 15, 20} exists");
  }
  if (spec.n < 1) throw std::invalid_argument("generate_dataset: n must be >= 1");
  if (!(std::abs(spec.rho) < 1.0)) {
    throw std::invalid_argument("generate_dataset: |rho| must be < 1");
  }

  Rng rng(spec.seed);
  Matrix x(spec.n, spec.p);
  std::vector<double> y(spec.n, 0.0);
  const double innovation = std::sqrt(1.0 - spec.rho * spec.rho);
  for (int i = 0; i < spec.n; ++i) {
    double prev = rng.normal();
    x(i, 0) = normal_cdf(prev);
    for (int j = 1; j < spec.p; ++j) {
      prev = spec.rho * prev + innovation * rng.normal();
      x(i, j) = prev;
    }
    const double eps = rng.normal();
    y[i] = x(i, 5) + x(i, 11) + x(i, 14) + x(i, 19) + 0.7 * x(i, 0) * eps;
  }

  GroundTruth truth;
  truth.beta_true.assign(spec.p, 0.0);
  truth.beta_true[0] = 0.7 * normal_quantile(spec.tau.tau());
  truth.beta_true[5] = truth.beta_true[11] = truth.beta_true[14] = truth.beta_true[19] = 1.0;
  truth.support = {0, 5, 11, 14, 19};
  return {Dataset(std::move(x), std::move(y)), std::move(truth)};
}

}  // namespace qcd
