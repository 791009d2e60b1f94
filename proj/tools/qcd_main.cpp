// Command-line interface for the penalized quantile regression solver:
//   simulate  write a synthetic dataset (X.csv, y.csv, truth.csv)
//   fit       single-lambda fit (beta.csv, prints the objective)
//   path      regularization path (path.csv, path_meta.json)
//   bench     benchmark runner (bench.json, bench_summary.csv)
//   demo      exact-vs-approximate update traces (demo_trace.csv)
//
// Exit codes: 0 success, 2 usage error, 3 data/parse error, 4 all bench
// cells failed. The QCD_SEED environment variable overrides --seed.

#include <charconv>
#include <cstdlib>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "qcd/qcd.hpp"

namespace {

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::uint64_t seed_with_env_override(std::uint64_t seed) {
  const char* env = std::getenv("QCD_SEED");
  if (env == nullptr || *env == '\0') return seed;
  std::uint64_t value = 0;
  const std::string text(env);
  const auto res = std::from_chars(text.data(), text.data() + text.size(), value);
  if (res.ec != std::errc{} || res.ptr != text.data() + text.size()) {
    throw UsageError("QCD_SEED must be a nonnegative integer, got '" + text + "'");
  }
  return value;
}

qcd::Quantile parse_tau(double tau) {
  if (!(tau > 0.0 && tau < 1.0)) throw UsageError("--tau must lie strictly in (0, 1)");
  return qcd::Quantile(tau);
}

qcd::PenaltyKind parse_penalty(const std::string& name) {
  if (name == "l1") return qcd::PenaltyKind::L1;
  if (name == "scad") return qcd::PenaltyKind::SCAD;
  if (name == "mcp") return qcd::PenaltyKind::MCP;
  throw UsageError("--penalty must be one of l1, scad, mcp");
}

void validate_shape(qcd::PenaltyKind kind, double a) {
  if (kind == qcd::PenaltyKind::MCP && !(a > 1.0)) throw UsageError("--a must be > 1 for mcp");
  if (kind == qcd::PenaltyKind::SCAD && !(a > 2.0)) throw UsageError("--a must be > 2 for scad");
}

// "1..20" (inclusive range) or a comma-separated list
std::vector<std::uint64_t> parse_seed_list(const std::string& text) {
  std::vector<std::uint64_t> seeds;
  auto parse_one = [&](const std::string& tok) {
    std::uint64_t v = 0;
    const auto res = std::from_chars(tok.data(), tok.data() + tok.size(), v);
    if (res.ec != std::errc{} || res.ptr != tok.data() + tok.size()) {
      throw UsageError("--seeds: bad integer '" + tok + "'");
    }
    return v;
  };
  const std::size_t dots = text.find("..");
  if (dots != std::string::npos) {
    const std::uint64_t lo = parse_one(text.substr(0, dots));
    const std::uint64_t hi = parse_one(text.substr(dots + 2));
    if (hi < lo) throw UsageError("--seeds: empty range '" + text + "'");
    for (std::uint64_t s = lo; s <= hi; ++s) seeds.push_back(s);
    return seeds;
  }
  std::size_t start = 0;
  while (start <= text.size()) {
    const std::size_t comma = text.find(',', start);
    const std::string tok =
        comma == std::string::npos ? text.substr(start) : text.substr(start, comma - start);
    if (!tok.empty()) seeds.push_back(parse_one(tok));
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  if (seeds.empty()) throw UsageError("--seeds: empty list");
  return seeds;
}

std::string join_path(const std::string& dir, const std::string& file) {
  if (dir.empty() || dir == ".") return file;
  return dir.back() == '/' ? dir + file : dir + "/" + file;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Pathwise coordinate descent for penalized quantile regression"};
  app.require_subcommand(1);

  // shared option storage
  int p = 100, n = 300, grid_len = 100, max_sweeps = 500, jobs = 0;
  double tau = 0.3, lambda = 0.0, shape_a = 2.2, min_ratio = 0.0, tol = 1e-7,
         nudge_sigma = 0.1;
  std::uint64_t seed = 1;
  std::string penalty = "l1", out_dir = ".", dims_text = "100,300,500",
              seeds_text = "1..20", methods_text = "qcd,qicd", variants_text = "warm_nudge";
  bool single_sweep = false, no_warm = false, stopping_rule = false, standardize = false,
       no_screen = false;

  auto* sim = app.add_subcommand("simulate", "Generate a synthetic dataset");
  sim->add_option("--p", p, "number of predictors (>= 20)")->capture_default_str();
  sim->add_option("--n", n, "number of observations")->capture_default_str();
  sim->add_option("--tau", tau, "quantile level in (0, 1)")->capture_default_str();
  sim->add_option("--seed", seed, "RNG seed")->capture_default_str();
  sim->add_option("--out-dir", out_dir, "output directory")->capture_default_str();

  auto* fit = app.add_subcommand("fit", "Fit at a single lambda (reads X.csv, y.csv)");
  fit->add_option("--tau", tau)->capture_default_str();
  auto* lambda_opt = fit->add_option("--lambda", lambda, "penalty strength (required)");
  fit->add_option("--penalty", penalty, "l1 | scad | mcp")->capture_default_str();
  fit->add_option("--a", shape_a, "shape parameter for scad/mcp")->capture_default_str();
  fit->add_option("--tol", tol)->capture_default_str();
  fit->add_option("--max-sweeps", max_sweeps)->capture_default_str();
  fit->add_flag("--standardize", standardize, "scale columns to unit mean absolute value");
  fit->add_option("--out-dir", out_dir)->capture_default_str();

  auto* path_cmd = app.add_subcommand("path", "Regularization path (reads X.csv, y.csv)");
  path_cmd->add_option("--tau", tau)->capture_default_str();
  path_cmd->add_option("--penalty", penalty)->capture_default_str();
  path_cmd->add_option("--a", shape_a)->capture_default_str();
  path_cmd->add_option("--grid-len", grid_len, "lambda grid length")->capture_default_str();
  path_cmd->add_option("--min-ratio", min_ratio,
                       "grid floor as a fraction of lambda_max (0 = auto)")
      ->capture_default_str();
  path_cmd->add_option("--tol", tol)->capture_default_str();
  path_cmd->add_option("--max-sweeps", max_sweeps)->capture_default_str();
  path_cmd->add_flag("--single-sweep", single_sweep, "one sweep per lambda");
  path_cmd->add_option("--nudge", nudge_sigma, "nudge standard deviation (0 disables)")
      ->capture_default_str();
  path_cmd->add_flag("--no-warm", no_warm, "disable warm starts");
  path_cmd->add_flag("--no-screen", no_screen, "disable the KKT zero-screen");
  path_cmd->add_option("--seed", seed)->capture_default_str();
  path_cmd->add_option("--out-dir", out_dir)->capture_default_str();

  auto* bench = app.add_subcommand("bench", "Benchmark runner (simulated data)");
  bench->add_option("--dims", dims_text, "comma-separated p values")->capture_default_str();
  bench->add_option("--n", n)->capture_default_str();
  bench->add_option("--seeds", seeds_text, "list 1,2,3 or range 1..20")->capture_default_str();
  bench->add_option("--tau", tau)->capture_default_str();
  bench->add_option("--methods", methods_text, "subset of qcd,qicd")->capture_default_str();
  bench->add_option("--variants", variants_text, "subset of vanilla,warm,warm_nudge")
      ->capture_default_str();
  bench->add_flag("--stopping-rule", stopping_rule, "stop each path once the rule triggers");
  bench->add_flag("--standardize", standardize, "center and scale columns before fitting");
  bench->add_option("--jobs", jobs, "worker threads (0 = hardware)")->capture_default_str();
  bench->add_option("--grid-len", grid_len)->capture_default_str();
  bench->add_option("--min-ratio", min_ratio)->capture_default_str();
  bench->add_option("--nudge", nudge_sigma)->capture_default_str();
  bench->add_option("--tol", tol)->capture_default_str();
  bench->add_option("--max-sweeps", max_sweeps)->capture_default_str();
  bench->add_option("--out-dir", out_dir)->capture_default_str();

  auto* demo = app.add_subcommand("demo", "Exact vs approximate update trace");
  demo->add_option("--seed", seed, "instance seed")->default_val(std::uint64_t{7});
  demo->add_option("--out-dir", out_dir)->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (sim->parsed()) {
      if (p < 20) {
        throw UsageError("--p must be >= 20: the generator's support {1, 6, 12, 15, 20} "
                         "needs at least 20 predictors");
      }
      if (n < 1) throw UsageError("--n must be >= 1");
      qcd::SimSpec spec;
      spec.p = p;
      spec.n = n;
      spec.tau = parse_tau(tau);
      spec.seed = seed_with_env_override(seed);
      auto [data, truth] = qcd::generate_dataset(spec);
      qcd::write_x_csv(join_path(out_dir, "X.csv"), data);
      qcd::write_y_csv(join_path(out_dir, "y.csv"), data);
      qcd::write_truth_csv(join_path(out_dir, "truth.csv"), truth);
      return 0;
    }

    if (fit->parsed()) {
      if (lambda_opt->count() == 0) throw UsageError("fit: --lambda is required");
      if (!(lambda >= 0.0)) throw UsageError("--lambda must be >= 0");
      const qcd::PenaltyKind kind = parse_penalty(penalty);
      validate_shape(kind, shape_a);
      const qcd::Quantile q = parse_tau(tau);
      qcd::Dataset data =
          qcd::read_dataset(join_path(out_dir, "X.csv"), join_path(out_dir, "y.csv"));
      if (standardize) {
        qcd::Matrix x = data.x();
        for (int j = 0; j < x.cols(); ++j) {
          double s = 0.0;
          for (double v : x.col(j)) s += std::abs(v);
          s /= x.rows();
          if (s > 0.0) {
            for (double& v : x.col(j)) v /= s;
          }
        }
        data = qcd::Dataset(std::move(x), data.y());
      }
      const qcd::PenaltySpec pen = qcd::PenaltySpec::make(kind, lambda, shape_a);
      auto [beta, diag] =
          qcd::solve_single(data, q, pen, {}, tol, max_sweeps);
      qcd::write_beta_csv(join_path(out_dir, "beta.csv"), beta);
      std::cout << "objective " << qcd::format_double(qcd::objective(data, beta, q, pen))
                << "\n";
      if (!diag.converged) {
        std::cerr << "warning: not converged after " << diag.sweeps << " sweeps\n";
      }
      return 0;
    }

    if (path_cmd->parsed()) {
      const qcd::PenaltyKind kind = parse_penalty(penalty);
      validate_shape(kind, shape_a);
      const qcd::Quantile q = parse_tau(tau);
      const qcd::Dataset data =
          qcd::read_dataset(join_path(out_dir, "X.csv"), join_path(out_dir, "y.csv"));
      qcd::PathConfig config;
      config.grid_len = grid_len;
      config.min_ratio = min_ratio;
      config.tol = tol;
      config.max_sweeps = max_sweeps;
      config.single_sweep = single_sweep;
      config.nudge_sigma = nudge_sigma;
      config.warm_start = !no_warm;
      config.kkt_screen = !no_screen;
      config.seed = seed_with_env_override(seed);
      config.penalty_a = shape_a;
      const qcd::SolutionPath solution = qcd::solve_path(data, q, kind, config);
      qcd::write_path_csv(join_path(out_dir, "path.csv"), solution);
      qcd::write_path_meta_json(join_path(out_dir, "path_meta.json"), solution, config, kind);
      return 0;
    }

    if (bench->parsed()) {
      qcd::BenchConfig config;
      config.dims.clear();
      for (const std::string& tok : CLI::detail::split(dims_text, ',')) {
        int dim = 0;
        const auto res = std::from_chars(tok.data(), tok.data() + tok.size(), dim);
        if (res.ec != std::errc{} || res.ptr != tok.data() + tok.size() || dim < 20) {
          throw UsageError("--dims: bad dimension '" + tok + "' (need integers >= 20)");
        }
        config.dims.push_back(dim);
      }
      config.n = n;
      config.seeds = parse_seed_list(seeds_text);
      if (!(tau > 0.0 && tau < 1.0)) throw UsageError("--tau must lie strictly in (0, 1)");
      config.tau = tau;
      config.methods.clear();
      for (const std::string& tok : CLI::detail::split(methods_text, ',')) {
        config.methods.push_back(qcd::parse_method(tok));
      }
      config.variants.clear();
      for (const std::string& tok : CLI::detail::split(variants_text, ',')) {
        config.variants.push_back(qcd::parse_variant(tok));
      }
      config.use_stopping_rule = stopping_rule;
      config.standardize = standardize;
      config.jobs = jobs > 0 ? jobs : static_cast<int>(std::thread::hardware_concurrency());
      if (config.jobs < 1) config.jobs = 1;
      config.grid_len = grid_len;
      config.min_ratio = min_ratio;
      config.nudge_sigma = nudge_sigma;
      config.tol = tol;
      config.max_sweeps = max_sweeps;
      const qcd::BenchReport report = qcd::run_benchmark(config);
      qcd::write_bench_json(join_path(out_dir, "bench.json"), report);
      qcd::write_bench_summary_csv(join_path(out_dir, "bench_summary.csv"), report);
      std::size_t failed = 0;
      for (const auto& cell : report.cells) {
        if (!cell.error.empty()) ++failed;
      }
      for (const auto& row : report.summary) {
        std::cout << to_string(row.method) << " " << to_string(row.variant) << " p=" << row.p
                  << " n=" << row.n << " min_rmse=" << row.mean_min_rmse << " ("
                  << row.sd_min_rmse << ") auroc=" << row.mean_auroc << " ("
                  << row.sd_auroc << ") time_s=" << row.mean_time << "\n";
      }
      if (failed == report.cells.size() && !report.cells.empty()) {
        std::cerr << "error: all " << failed << " cells failed\n";
        return 4;
      }
      if (failed > 0) {
        std::cerr << "warning: " << failed << " of " << report.cells.size()
                  << " cells failed (see bench.json)\n";
      }
      return 0;
    }

    if (demo->parsed()) {
      const qcd::DemoTrace trace = qcd::demo_exact_vs_approx(seed_with_env_override(seed));
      qcd::write_demo_csv(join_path(out_dir, "demo_trace.csv"), trace);
      return 0;
    }
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const qcd::ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
  return 0;
}
