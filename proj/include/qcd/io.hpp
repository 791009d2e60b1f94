#pragma once

#include <charconv>
#include <cstdint>
#include <fstream>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include <json.hpp>

#include "qcd/bench.hpp"
#include "qcd/core.hpp"
#include "qcd/path.hpp"
#include "qcd/sim.hpp"

namespace qcd {

/// Parse failure with file location, reported 1-based.
class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& file, std::size_t row, std::size_t col,
             const std::string& what)
      : std::runtime_error(file + ":" + std::to_string(row) + ":" + std::to_string(col) +
                           ": " + what),
        file_(file), row_(row), col_(col) {}
  const std::string& file() const { return file_; }
  std::size_t row() const { return row_; }
  std::size_t col() const { return col_; }

 private:
  std::string file_;
  std::size_t row_, col_;
};

/// Shortest decimal representation that parses back to the identical double.
inline std::string format_double(double value) {
  char buf[40];
  const auto res = std::to_chars(buf, buf + sizeof(buf), value);
  return std::string(buf, res.ptr);
}

inline double parse_double(std::string_view text, const std::string& file, std::size_t row,
                           std::size_t col) {
  double value = 0.0;
  const auto res = std::from_chars(text.data(), text.data() + text.size(), value);
  if (res.ec != std::errc{} || res.ptr != text.data() + text.size()) {
    throw ParseError(file, row, col, "expected a number, got '" + std::string(text) + "'");
  }
  return value;
}

inline long long parse_int(std::string_view text, const std::string& file, std::size_t row,
                           std::size_t col) {
  long long value = 0;
  const auto res = std::from_chars(text.data(), text.data() + text.size(), value);
  if (res.ec != std::errc{} || res.ptr != text.data() + text.size()) {
    throw ParseError(file, row, col, "expected an integer, got '" + std::string(text) + "'");
  }
  return value;
}

namespace detail {

inline std::ofstream open_out(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open '" + path + "' for writing");
  return out;
}

inline std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::size_t start = 0;
  for (;;) {
    const std::size_t comma = line.find(',', start);
    if (comma == std::string::npos) {
      fields.push_back(line.substr(start));
      return fields;
    }
    fields.push_back(line.substr(start, comma - start));
    start = comma + 1;
  }
}

/// Reads a CSV file into rows of string fields; validates the header.
inline std::vector<std::vector<std::string>> read_csv(const std::string& path,
                                                      const std::string& expected_header) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open '" + path + "' for reading");
  std::vector<std::vector<std::string>> rows;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (lineno == 1) {
      if (line != expected_header) {
        throw ParseError(path, 1, 1,
                         "expected header '" + expected_header + "', got '" + line + "'");
      }
      continue;
    }
    if (line.empty()) continue;
    rows.push_back(split_csv_line(line));
  }
  return rows;
}

}  // namespace detail

// --------------------------------------------------------------------------
// Dataset files: X.csv (header x1..xp), y.csv (header y), truth.csv (j 1-based)

inline void write_x_csv(const std::string& path, const Dataset& data) {
  auto out = detail::open_out(path);
  for (int j = 0; j < data.p(); ++j) out << (j ? "," : "") << "x" << (j + 1);
  out << "\n";
  for (int i = 0; i < data.n(); ++i) {
    for (int j = 0; j < data.p(); ++j) {
      out << (j ? "," : "") << format_double(data.x()(i, j));
    }
    out << "\n";
  }
}

inline void write_y_csv(const std::string& path, const Dataset& data) {
  auto out = detail::open_out(path);
  out << "y\n";
  for (int i = 0; i < data.n(); ++i) out << format_double(data.y()[i]) << "\n";
}

inline void write_truth_csv(const std::string& path, const GroundTruth& truth) {
  auto out = detail::open_out(path);
  out << "j,beta_true\n";
  for (std::size_t j = 0; j < truth.beta_true.size(); ++j) {
    out << (j + 1) << "," << format_double(truth.beta_true[j]) << "\n";
  }
}

inline Dataset read_dataset(const std::string& x_path, const std::string& y_path) {
  std::ifstream in(x_path);
  if (!in) throw std::runtime_error("cannot open '" + x_path + "' for reading");
  std::string line;
  if (!std::getline(in, line)) throw ParseError(x_path, 1, 1, "empty file");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  const auto header = detail::split_csv_line(line);
  const int p = static_cast<int>(header.size());
  for (int j = 0; j < p; ++j) {
    if (header[j] != "x" + std::to_string(j + 1)) {
      throw ParseError(x_path, 1, static_cast<std::size_t>(j) + 1,
                       "expected column 'x" + std::to_string(j + 1) + "'");
    }
  }
  std::vector<std::vector<double>> rows;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto fields = detail::split_csv_line(line);
    if (static_cast<int>(fields.size()) != p) {
      throw ParseError(x_path, lineno, 1,
                       "expected " + std::to_string(p) + " fields, got " +
                           std::to_string(fields.size()));
    }
    std::vector<double> row(p);
    for (int j = 0; j < p; ++j) {
      row[j] = parse_double(fields[j], x_path, lineno, static_cast<std::size_t>(j) + 1);
    }
    rows.push_back(std::move(row));
  }
  const int n = static_cast<int>(rows.size());
  if (n == 0) throw ParseError(x_path, lineno, 1, "no data rows");

  const auto y_rows = detail::read_csv(y_path, "y");
  if (static_cast<int>(y_rows.size()) != n) {
    throw ParseError(y_path, y_rows.size() + 1, 1,
                     "y has " + std::to_string(y_rows.size()) + " rows but X has " +
                         std::to_string(n));
  }
  Matrix x(n, p);
  std::vector<double> y(n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < p; ++j) x(i, j) = rows[i][j];
    y[i] = parse_double(y_rows[i][0], y_path, static_cast<std::size_t>(i) + 2, 1);
  }
  return Dataset(std::move(x), std::move(y));
}

// --------------------------------------------------------------------------
// Solution path files

/// path.csv rows are `lambda,j,beta` with 1-based j, nonzero coefficients
/// only; each lambda block ends with a `lambda,-1,sweeps` diagnostic row.
inline void write_path_csv(const std::string& path, const SolutionPath& solution) {
  auto out = detail::open_out(path);
  out << "lambda,j,beta\n";
  for (std::size_t ell = 0; ell < solution.lambdas.size(); ++ell) {
    const std::string lam = format_double(solution.lambdas[ell]);
    const auto& beta = solution.betas[ell];
    for (std::size_t j = 0; j < beta.size(); ++j) {
      if (beta[j] != 0.0) out << lam << "," << (j + 1) << "," << format_double(beta[j]) << "\n";
    }
    out << lam << ",-1," << solution.diagnostics[ell].sweeps << "\n";
  }
}

struct PathFile {
  std::vector<double> lambdas;
  std::vector<Coefficients> betas;
  std::vector<int> sweeps;
};

inline PathFile read_path_csv(const std::string& path, int p) {
  PathFile out;
  Coefficients current(p, 0.0);
  bool any = false;
  std::optional<double> block_lambda;
  const auto rows = detail::read_csv(path, "lambda,j,beta");
  std::size_t lineno = 1;
  for (const auto& fields : rows) {
    ++lineno;
    if (fields.size() != 3) {
      throw ParseError(path, lineno, 1, "expected 3 fields");
    }
    const double lambda = parse_double(fields[0], path, lineno, 1);
    const long long j = parse_int(fields[1], path, lineno, 2);
    if (block_lambda && *block_lambda != lambda) {
      throw ParseError(path, lineno, 1, "lambda changed inside a block");
    }
    block_lambda = lambda;
    any = true;
    if (j == -1) {
      out.lambdas.push_back(lambda);
      out.betas.push_back(current);
      out.sweeps.push_back(static_cast<int>(parse_int(fields[2], path, lineno, 3)));
      current.assign(p, 0.0);
      block_lambda.reset();
    } else {
      if (j < 1 || j > p) throw ParseError(path, lineno, 2, "coordinate out of range");
      current[j - 1] = parse_double(fields[2], path, lineno, 3);
    }
  }
  if (block_lambda) throw ParseError(path, lineno, 1, "unterminated lambda block");
  (void)any;
  return out;
}

inline void write_path_meta_json(const std::string& path, const SolutionPath& solution,
                                 const PathConfig& config, PenaltyKind kind) {
  nlohmann::json meta;
  meta["penalty"] = to_string(kind);
  meta["grid"] = solution.lambdas;
  meta["config"] = {{"grid_len", config.grid_len},
                    {"min_ratio", config.min_ratio},
                    {"nudge_sigma", config.nudge_sigma},
                    {"warm_start", config.warm_start},
                    {"single_sweep", config.single_sweep},
                    {"tol", config.tol},
                    {"max_sweeps", config.max_sweeps},
                    {"seed", config.seed},
                    {"kkt_screen", config.kkt_screen},
                    {"penalty_a", config.penalty_a}};
  auto& diags = meta["diagnostics"] = nlohmann::json::array();
  for (const auto& d : solution.diagnostics) {
    diags.push_back({{"lambda", d.lambda},
                     {"sweeps", d.sweeps},
                     {"converged", d.converged},
                     {"kkt_skips", d.kkt_skips},
                     {"visits", d.visits},
                     {"seconds", d.seconds}});
  }
  auto out = detail::open_out(path);
  out << meta.dump(2) << "\n";
}

inline void write_beta_csv(const std::string& path, std::span<const double> beta) {
  auto out = detail::open_out(path);
  out << "j,beta\n";
  for (std::size_t j = 0; j < beta.size(); ++j) {
    out << (j + 1) << "," << format_double(beta[j]) << "\n";
  }
}

// --------------------------------------------------------------------------
// Benchmark files

inline nlohmann::json bench_cell_json(const BenchCell& cell) {
  nlohmann::json c = {{"method", to_string(cell.method)},
                      {"variant", to_string(cell.variant)},
                      {"p", cell.p},
                      {"n", cell.n},
                      {"seed", cell.seed},
                      {"lambdas", cell.lambdas},
                      {"rmse_curve", cell.rmse_curve},
                      {"min_rmse", cell.min_rmse},
                      {"min_index", cell.min_index},
                      {"auroc_at_min", cell.auroc_at_min},
                      {"seconds", cell.seconds},
                      {"kkt_skips", cell.kkt_skips},
                      {"visits", cell.visits}};
  if (!cell.objective_curve.empty()) c["objective_curve"] = cell.objective_curve;
  if (cell.stop_index) c["stop_index"] = *cell.stop_index;
  return c;
}

inline void write_bench_json(const std::string& path, const BenchReport& report) {
  nlohmann::json doc;
  auto& cells = doc["cells"] = nlohmann::json::array();
  auto& errors = doc["errors"] = nlohmann::json::array();
  for (const BenchCell& cell : report.cells) {
    if (!cell.error.empty()) {
      errors.push_back({{"method", to_string(cell.method)},
                        {"variant", to_string(cell.variant)},
                        {"p", cell.p},
                        {"n", cell.n},
                        {"seed", cell.seed},
                        {"message", cell.error}});
      continue;
    }
    cells.push_back(bench_cell_json(cell));
  }
  auto& summary = doc["summary"] = nlohmann::json::array();
  for (const BenchSummaryRow& row : report.summary) {
    summary.push_back({{"method", to_string(row.method)},
                       {"variant", to_string(row.variant)},
                       {"p", row.p},
                       {"n", row.n},
                       {"cells", row.cells},
                       {"mean_time_s", row.mean_time},
                       {"sd_time_s", row.sd_time},
                       {"mean_min_rmse", row.mean_min_rmse},
                       {"sd_min_rmse", row.sd_min_rmse},
                       {"mean_auroc", row.mean_auroc},
                       {"sd_auroc", row.sd_auroc}});
  }
  auto out = detail::open_out(path);
  out << doc.dump(2) << "\n";
}

inline Method parse_method(const std::string& text) {
  if (text == "qcd") return Method::QCD;
  if (text == "qicd") return Method::QICD;
  throw std::invalid_argument("unknown method '" + text + "'");
}

inline Variant parse_variant(const std::string& text) {
  if (text == "vanilla") return Variant::Vanilla;
  if (text == "warm") return Variant::Warm;
  if (text == "warm_nudge") return Variant::WarmNudge;
  throw std::invalid_argument("unknown variant '" + text + "'");
}

inline BenchReport read_bench_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open '" + path + "' for reading");
  nlohmann::json doc = nlohmann::json::parse(in);
  BenchReport report;
  for (const auto& c : doc.at("cells")) {
    BenchCell cell;
    cell.method = parse_method(c.at("method").get<std::string>());
    cell.variant = parse_variant(c.at("variant").get<std::string>());
    cell.p = c.at("p").get<int>();
    cell.n = c.at("n").get<int>();
    cell.seed = c.at("seed").get<std::uint64_t>();
    cell.lambdas = c.at("lambdas").get<std::vector<double>>();
    cell.rmse_curve = c.at("rmse_curve").get<std::vector<double>>();
    if (c.contains("objective_curve")) {
      cell.objective_curve = c.at("objective_curve").get<std::vector<double>>();
    }
    cell.min_rmse = c.at("min_rmse").get<double>();
    cell.min_index = c.at("min_index").get<std::size_t>();
    cell.auroc_at_min = c.at("auroc_at_min").get<double>();
    cell.seconds = c.at("seconds").get<double>();
    if (c.contains("stop_index")) cell.stop_index = c.at("stop_index").get<std::size_t>();
    cell.kkt_skips = c.at("kkt_skips").get<long long>();
    cell.visits = c.at("visits").get<long long>();
    report.cells.push_back(std::move(cell));
  }
  return report;
}

inline void write_bench_summary_csv(const std::string& path, const BenchReport& report) {
  auto out = detail::open_out(path);
  out << "method,variant,p,n,mean_time_s,sd_time_s,mean_min_rmse,sd_min_rmse,"
         "mean_auroc,sd_auroc\n";
  for (const BenchSummaryRow& row : report.summary) {
    out << to_string(row.method) << "," << to_string(row.variant) << "," << row.p << ","
        << row.n << "," << format_double(row.mean_time) << ",";
    out << (row.cells > 1 ? format_double(row.sd_time) : "") << ",";
    out << format_double(row.mean_min_rmse) << ",";
    out << (row.cells > 1 ? format_double(row.sd_min_rmse) : "") << ",";
    out << format_double(row.mean_auroc) << ",";
    out << (row.cells > 1 ? format_double(row.sd_auroc) : "") << "\n";
  }
}

inline void write_demo_csv(const std::string& path, const DemoTrace& trace) {
  auto out = detail::open_out(path);
  out << "iteration,coordinate,method,grid_beta,objective,chosen_beta\n";
  for (const DemoRow& row : trace.rows) {
    out << row.iteration << "," << row.coordinate << "," << row.method << ","
        << format_double(row.grid_beta) << "," << format_double(row.objective) << ","
        << format_double(row.chosen_beta) << "\n";
  }
}

}  // namespace qcd
