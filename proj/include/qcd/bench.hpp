#pragma once

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "qcd/core.hpp"
#include "qcd/metrics.hpp"
#include "qcd/path.hpp"
#include "qcd/qicd.hpp"
#include "qcd/sim.hpp"

namespace qcd {

enum class Method { QCD, QICD };
enum class Variant { Vanilla, Warm, WarmNudge };

inline const char* to_string(Method m) { return m == Method::QCD ? "qcd" : "qicd"; }
inline const char* to_string(Variant v) {
  switch (v) {
    case Variant::Vanilla: return "vanilla";
    case Variant::Warm: return "warm";
    case Variant::WarmNudge: return "warm_nudge";
  }
  return "?";
}

/// Benchmark plan. The defaults reproduce the simulation protocol at
/// p in {100, 300, 500}, n = 300, tau = 0.3, seeds 1..20, warm start + nudge.
struct BenchConfig {
  std::vector<int> dims{100, 300, 500};
  int n = 300;
  std::vector<std::uint64_t> seeds;  // empty -> 1..20
  double tau = 0.3;
  std::vector<Method> methods{Method::QCD, Method::QICD};
  std::vector<Variant> variants{Variant::WarmNudge};
  bool use_stopping_rule = false;
  bool standardize = false;  // center/scale columns before fitting
  int jobs = 1;
  int grid_len = 100;
  double min_ratio = 0.0;  // 0 -> auto per dimension
  double nudge_sigma = 0.1;
  double tol = 1e-7;
  int max_sweeps = 500;
  bool kkt_screen = true;
  bool record_objectives = false;  // per-lambda objective of the stored betas
};

struct BenchCell {
  Method method = Method::QCD;
  Variant variant = Variant::WarmNudge;
  int p = 0;
  int n = 0;
  std::uint64_t seed = 0;
  std::vector<double> lambdas;
  std::vector<double> rmse_curve;
  std::vector<double> objective_curve;
  double min_rmse = std::numeric_limits<double>::quiet_NaN();
  std::size_t min_index = 0;
  double auroc_at_min = std::numeric_limits<double>::quiet_NaN();
  double seconds = 0.0;
  std::optional<std::size_t> stop_index;
  long long kkt_skips = 0;
  long long visits = 0;
  std::string error;  // empty on success
};

struct BenchSummaryRow {
  Method method = Method::QCD;
  Variant variant = Variant::WarmNudge;
  int p = 0;
  int n = 0;
  int cells = 0;
  double mean_time = 0.0, sd_time = 0.0;
  double mean_min_rmse = 0.0, sd_min_rmse = 0.0;
  double mean_auroc = 0.0, sd_auroc = 0.0;
};

struct BenchReport {
  std::vector<BenchCell> cells;
  std::vector<BenchSummaryRow> summary;
};

namespace detail {

inline std::uint64_t data_stream(std::uint64_t seed, int p, int n) {
  return substream_seed(seed, (static_cast<std::uint64_t>(p) << 24) ^
                                  static_cast<std::uint64_t>(n));
}

inline std::uint64_t nudge_stream(std::uint64_t seed, int p, int n, Variant variant) {
  // shared across methods so paired cells see identical nudge draws
  return substream_seed(seed, (static_cast<std::uint64_t>(p) << 24) ^
                                  (static_cast<std::uint64_t>(n) << 4) ^
                                  (static_cast<std::uint64_t>(variant) + 1));
}

}  // namespace detail

/// Runs one (method, variant, p, seed) cell: generate data, solve the path
/// (stopping rule applied online when enabled), record the RMSE curve,
/// min-RMSE, AUROC at the min-RMSE lambda, and wall time around the solve.
inline BenchCell run_bench_cell(const BenchConfig& cfg, Method method, Variant variant,
                                int p, std::uint64_t seed) {
  BenchCell cell;
  cell.method = method;
  cell.variant = variant;
  cell.p = p;
  cell.n = cfg.n;
  cell.seed = seed;
  try {
    SimSpec spec;
    spec.p = p;
    spec.n = cfg.n;
    spec.tau = Quantile(cfg.tau);
    spec.seed = detail::data_stream(seed, p, cfg.n);
    auto [raw_data, truth] = generate_dataset(spec);

    // optional standardization: fit on centered unit-sd columns, report
    // coefficients mapped back to the original scale
    std::vector<double> scale(p, 1.0);
    Dataset data = raw_data;
    if (cfg.standardize) {
      Matrix xs(cfg.n, p);
      for (int j = 0; j < p; ++j) {
        double mean = 0.0, var = 0.0;
        for (int i = 0; i < cfg.n; ++i) mean += raw_data.x()(i, j);
        mean /= cfg.n;
        for (int i = 0; i < cfg.n; ++i) {
          const double c = raw_data.x()(i, j) - mean;
          var += c * c;
        }
        const double sd = std::sqrt(var / cfg.n);
        scale[j] = sd > 0.0 ? sd : 1.0;
        for (int i = 0; i < cfg.n; ++i) {
          xs(i, j) = (raw_data.x()(i, j) - mean) / scale[j];
        }
      }
      data = Dataset(std::move(xs), raw_data.y());
    }
    auto unscaled = [&](std::span<const double> beta) {
      Coefficients out(beta.begin(), beta.end());
      if (cfg.standardize) {
        for (int j = 0; j < p; ++j) out[j] /= scale[j];
      }
      return out;
    };

    PathConfig pc;
    pc.grid_len = cfg.grid_len;
    pc.min_ratio = cfg.min_ratio;
    pc.tol = cfg.tol;
    pc.max_sweeps = cfg.max_sweeps;
    pc.kkt_screen = cfg.kkt_screen;
    pc.warm_start = variant != Variant::Vanilla;
    pc.nudge_sigma = variant == Variant::WarmNudge ? cfg.nudge_sigma : 0.0;
    pc.seed = detail::nudge_stream(seed, p, cfg.n, variant);

    double first_rmse = 0.0;
    double running_min = std::numeric_limits<double>::infinity();
    auto callback = [&](int index, std::span<const double> beta) {
      const double r = rmse(unscaled(beta), truth.beta_true);
      cell.rmse_curve.push_back(r);
      if (index == 0) first_rmse = r;
      running_min = std::min(running_min, r);
      if (cfg.use_stopping_rule && index > 0 &&
          r - running_min > 0.3 * (first_rmse - running_min)) {
        cell.stop_index = static_cast<std::size_t>(index);
        return false;
      }
      return true;
    };

    const auto start = std::chrono::steady_clock::now();
    const SolutionPath path =
        method == Method::QCD
            ? solve_path(data, spec.tau, PenaltyKind::L1, pc, callback)
            : qicd_solve_path(data, spec.tau, pc, callback);
    const auto stop = std::chrono::steady_clock::now();
    cell.seconds = std::chrono::duration<double>(stop - start).count();

    cell.lambdas = path.lambdas;
    for (const auto& d : path.diagnostics) {
      cell.kkt_skips += d.kkt_skips;
      cell.visits += d.visits;
    }
    cell.min_index = static_cast<std::size_t>(
        std::min_element(cell.rmse_curve.begin(), cell.rmse_curve.end()) -
        cell.rmse_curve.begin());
    cell.min_rmse = cell.rmse_curve[cell.min_index];
    cell.auroc_at_min = auroc(unscaled(path.betas[cell.min_index]), truth.support);
    if (cfg.record_objectives) {
      cell.objective_curve.reserve(path.lambdas.size());
      for (std::size_t ell = 0; ell < path.lambdas.size(); ++ell) {
        cell.objective_curve.push_back(
            objective(data, path.betas[ell], spec.tau, PenaltySpec::l1(path.lambdas[ell])));
      }
    }
  } catch (const std::exception& e) {
    cell.error = e.what();
  }
  return cell;
}

/// Runs the full plan. Cells are independent and fan out to `jobs` workers;
/// one warm-up cell is run and discarded first so timings exclude cold-start
/// effects. Per-cell failures are recorded, not fatal.
inline BenchReport run_benchmark(const BenchConfig& cfg) {
  std::vector<std::uint64_t> seeds = cfg.seeds;
  if (seeds.empty()) {
    for (std::uint64_t s = 1; s <= 20; ++s) seeds.push_back(s);
  }

  struct CellKey {
    Method method;
    Variant variant;
    int p;
    std::uint64_t seed;
  };
  std::vector<CellKey> keys;
  for (Method m : cfg.methods) {
    for (Variant v : cfg.variants) {
      for (int p : cfg.dims) {
        for (std::uint64_t s : seeds) keys.push_back({m, v, p, s});
      }
    }
  }

  BenchReport report;
  report.cells.resize(keys.size());
  if (keys.empty()) return report;

  run_bench_cell(cfg, keys[0].method, keys[0].variant, keys[0].p, keys[0].seed);  // warm-up

  const int jobs = std::max(1, cfg.jobs);
  if (jobs == 1) {
    for (std::size_t k = 0; k < keys.size(); ++k) {
      report.cells[k] =
          run_bench_cell(cfg, keys[k].method, keys[k].variant, keys[k].p, keys[k].seed);
    }
  } else {
    std::atomic<std::size_t> next{0};
    auto worker = [&]() {
      for (;;) {
        const std::size_t k = next.fetch_add(1);
        if (k >= keys.size()) return;
        report.cells[k] =
            run_bench_cell(cfg, keys[k].method, keys[k].variant, keys[k].p, keys[k].seed);
      }
    };
    std::vector<std::thread> pool;
    for (int t = 0; t < jobs; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }

  // aggregate per (method, variant, p)
  for (Method m : cfg.methods) {
    for (Variant v : cfg.variants) {
      for (int p : cfg.dims) {
        std::vector<double> times, rmses, aurocs;
        for (const BenchCell& c : report.cells) {
          if (c.method != m || c.variant != v || c.p != p || !c.error.empty()) continue;
          times.push_back(c.seconds);
          rmses.push_back(c.min_rmse);
          aurocs.push_back(c.auroc_at_min);
        }
        if (times.empty()) continue;
        auto mean = [](const std::vector<double>& xs) {
          double s = 0.0;
          for (double x : xs) s += x;
          return s / static_cast<double>(xs.size());
        };
        auto sd = [&](const std::vector<double>& xs, double mu) {
          if (xs.size() < 2) return 0.0;
          double s = 0.0;
          for (double x : xs) s += (x - mu) * (x - mu);
          return std::sqrt(s / static_cast<double>(xs.size() - 1));
        };
        BenchSummaryRow row;
        row.method = m;
        row.variant = v;
        row.p = p;
        row.n = cfg.n;
        row.cells = static_cast<int>(times.size());
        row.mean_time = mean(times);
        row.sd_time = sd(times, row.mean_time);
        row.mean_min_rmse = mean(rmses);
        row.sd_min_rmse = sd(rmses, row.mean_min_rmse);
        row.mean_auroc = mean(aurocs);
        row.sd_auroc = sd(aurocs, row.mean_auroc);
        report.summary.push_back(row);
      }
    }
  }
  return report;
}

// ---------------------------------------------------------------------------
// Exact-vs-approximate illustration: two CD iterations on an n = 5, p = 2
// instance, run side by side with the exact and the QICD update.

struct DemoRow {
  int iteration = 0;   // 1-based
  int coordinate = 0;  // 1-based
  std::string method;  // "qcd" | "qicd"
  double grid_beta = 0.0;
  double objective = 0.0;
  double chosen_beta = 0.0;
};

struct DemoTrace {
  std::uint64_t seed = 0;
  double lambda = 0.0;  // shared, unaveraged scale
  double tau = 0.0;
  std::vector<DemoRow> rows;
};

/// Emits per-step objective curves and chosen minimizers for both updates.
/// The qcd rows carry the true slice objective (1/(n+1)) [(1/n) sum rho + (lambda/n)|b|];
/// the qicd rows carry the weight-frozen surrogate it actually minimizes.
inline DemoTrace demo_exact_vs_approx(std::uint64_t seed) {
  const int n = 5;
  const int p = 2;
  Rng rng(substream_seed(seed, 0x0de30));
  Matrix x(n, p);
  std::vector<double> y(n);
  for (int j = 0; j < p; ++j) {
    for (int i = 0; i < n; ++i) x(i, j) = rng.normal();
  }
  for (int i = 0; i < n; ++i) y[i] = rng.normal();
  const Dataset data(std::move(x), std::move(y));
  const Quantile tau(0.3);
  const double lambda = 0.3 * lambda_max(data, tau);
  const double lambda_avg = lambda / static_cast<double>(n);

  DemoTrace trace;
  trace.seed = seed;
  trace.lambda = lambda;
  trace.tau = tau.tau();

  FitState exact_state(data, tau, 0);
  FitState qicd_state(data, tau, 0);
  const double scale = 1.0 / static_cast<double>(n + 1);

  // true slice objective at beta_j = b, other coordinate from `state`
  auto true_slice = [&](const FitState& state, int j, double b) {
    double loss = 0.0;
    for (int i = 0; i < n; ++i) {
      const double r = state.resid[i] + data.x()(i, j) * (state.beta[j] - b);
      loss += check_loss(r, tau);
    }
    return scale * (loss / static_cast<double>(n) + lambda_avg * std::abs(b));
  };

  for (int iter = 1; iter <= 2; ++iter) {
    for (int j = 0; j < p; ++j) {
      // exact update on the true slice
      const BreakpointProfile profile =
          build_profile(data, exact_state.beta, j, tau, PenaltySpec::l1(lambda));
      const double exact_choice = coord_min_l1(profile, lambda);

      // frozen-weight surrogate of the QICD trajectory
      std::vector<double> values, weights;
      const auto xj = data.x().col(j);
      for (int i = 0; i < n; ++i) {
        const double xv = xj[i];
        if (xv == 0.0) continue;
        values.push_back((qicd_state.resid[i] + xv * qicd_state.beta[j]) / xv);
        weights.push_back(std::abs(xv) / static_cast<double>(n) *
                          (qicd_state.resid[i] < 0.0 ? 1.0 - tau.tau() : tau.tau()));
      }
      auto surrogate = [&](double b) {
        double s = 0.0;
        for (std::size_t k = 0; k < values.size(); ++k) {
          s += weights[k] * std::abs(values[k] - b);
        }
        return scale * (s + lambda_avg * std::abs(b));
      };
      const double qicd_choice = qicd_update(qicd_state, data, tau, lambda_avg, j);

      // shared plotting grid spanning both methods' breakpoints
      double lo = 0.0, hi = 0.0;
      for (const Breakpoint& b : profile.points) {
        lo = std::min(lo, b.value);
        hi = std::max(hi, b.value);
      }
      for (double v : values) {
        lo = std::min(lo, v);
        hi = std::max(hi, v);
      }
      std::vector<double> grid;
      const int steps = 200;
      for (int k = 0; k <= steps; ++k) {
        grid.push_back(lo - 0.5 + (hi - lo + 1.0) * static_cast<double>(k) / steps);
      }
      grid.push_back(exact_choice);
      grid.push_back(qicd_choice);
      std::sort(grid.begin(), grid.end());

      for (double b : grid) {
        trace.rows.push_back(
            {iter, j + 1, "qcd", b, true_slice(exact_state, j, b), exact_choice});
      }
      for (double b : grid) {
        trace.rows.push_back({iter, j + 1, "qicd", b, surrogate(b), qicd_choice});
      }

      detail::apply_coordinate_change(exact_state, data, j, exact_choice);
      detail::apply_coordinate_change(qicd_state, data, j, qicd_choice);
    }
  }
  return trace;
}

}  // namespace qcd
