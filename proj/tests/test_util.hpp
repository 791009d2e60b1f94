#pragma once

#include <cmath>
#include <vector>

#include "qcd/coord_min.hpp"
#include "qcd/core.hpp"
#include "qcd/rng.hpp"

namespace testutil {

inline qcd::Dataset random_dataset(qcd::Rng& rng, int n, int p, double y_scale = 1.0) {
  qcd::Matrix x(n, p);
  std::vector<double> y(n);
  for (int j = 0; j < p; ++j) {
    for (int i = 0; i < n; ++i) x(i, j) = rng.normal();
  }
  for (int i = 0; i < n; ++i) y[i] = y_scale * rng.normal();
  return qcd::Dataset(std::move(x), std::move(y));
}

/// Random one-coordinate problem: n points with signs, magnitudes, and
/// residual positions drawn at random; realizable as a column of a dataset.
inline qcd::BreakpointProfile random_profile(qcd::Rng& rng, int n, double tau,
                                             const qcd::PenaltySpec& pen) {
  qcd::BreakpointProfile profile;
  profile.base_slope = 0.0;
  for (int i = 0; i < n; ++i) {
    const double x = (rng.uniform() < 0.5 ? -1.0 : 1.0) * (0.2 + std::abs(rng.normal()));
    const double v = 1.2 * rng.normal();
    const double t = x > 0.0 ? tau : 1.0 - tau;
    profile.points.push_back({v, std::abs(x), t});
    profile.base_slope -= std::abs(x) * t;
  }
  qcd::append_penalty_breakpoints(profile.points, pen);
  std::sort(profile.points.begin(), profile.points.end(),
            [](const qcd::Breakpoint& a, const qcd::Breakpoint& b) {
              return a.value < b.value;
            });
  return profile;
}

}  // namespace testutil
