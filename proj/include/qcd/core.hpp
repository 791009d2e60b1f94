#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace qcd {

/// Coefficient vector, length p.
using Coefficients = std::vector<double>;

/// Dense real matrix stored column-major: coordinate descent scans one
/// predictor column at a time.
class Matrix {
 public:
  Matrix() = default;
  Matrix(int rows, int cols)
      : rows_(rows), cols_(cols),
        data_(static_cast<std::size_t>(rows) * static_cast<std::size_t>(cols), 0.0) {
    if (rows < 0 || cols < 0) throw std::invalid_argument("Matrix: negative dimension");
  }

  int rows() const { return rows_; }
  int cols() const { return cols_; }

  double operator()(int i, int j) const { return data_[index(i, j)]; }
  double& operator()(int i, int j) { return data_[index(i, j)]; }

  std::span<const double> col(int j) const {
    return {data_.data() + index(0, j), static_cast<std::size_t>(rows_)};
  }
  std::span<double> col(int j) {
    return {data_.data() + index(0, j), static_cast<std::size_t>(rows_)};
  }

 private:
  std::size_t index(int i, int j) const {
    return static_cast<std::size_t>(j) * static_cast<std::size_t>(rows_) +
           static_cast<std::size_t>(i);
  }

  int rows_ = 0;
  int cols_ = 0;
  std::vector<double> data_;
};

/// Immutable problem instance: n observations of (x_i, y_i).
class Dataset {
 public:
  Dataset(Matrix x, std::vector<double> y) : x_(std::move(x)), y_(std::move(y)) {
    if (x_.rows() < 1 || x_.cols() < 1) {
      throw std::invalid_argument("Dataset: need at least one row and one column");
    }
    if (static_cast<std::size_t>(x_.rows()) != y_.size()) {
      throw std::invalid_argument("Dataset: x has " + std::to_string(x_.rows()) +
                                  " rows but y has " + std::to_string(y_.size()) +
                                  " entries");
    }
    for (int j = 0; j < x_.cols(); ++j) {
      for (double v : x_.col(j)) {
        if (!std::isfinite(v)) throw std::invalid_argument("Dataset: non-finite entry in x");
      }
    }
    for (double v : y_) {
      if (!std::isfinite(v)) throw std::invalid_argument("Dataset: non-finite entry in y");
    }
  }

  int n() const { return x_.rows(); }
  int p() const { return x_.cols(); }
  const Matrix& x() const { return x_; }
  const std::vector<double>& y() const { return y_; }

 private:
  Matrix x_;
  std::vector<double> y_;
};

/// Quantile level, strictly inside (0, 1).
class Quantile {
 public:
  explicit Quantile(double tau) : tau_(tau) {
    if (!(tau > 0.0 && tau < 1.0)) {
      throw std::invalid_argument("Quantile: tau must lie strictly in (0, 1)");
    }
  }
  double tau() const { return tau_; }

 private:
  double tau_;
};

enum class PenaltyKind { L1, SCAD, MCP };

inline const char* to_string(PenaltyKind k) {
  switch (k) {
    case PenaltyKind::L1: return "l1";
    case PenaltyKind::SCAD: return "scad";
    case PenaltyKind::MCP: return "mcp";
  }
  return "?";
}

/// Penalty choice with strength lambda and, for SCAD/MCP, shape a.
/// Defaults a = 2.2 for both nonconvex penalties.
class PenaltySpec {
 public:
  static PenaltySpec l1(double lambda) { return PenaltySpec(PenaltyKind::L1, lambda, 0.0); }
  static PenaltySpec mcp(double lambda, double a = 2.2) {
    if (!(a > 1.0)) throw std::invalid_argument("PenaltySpec: MCP requires a > 1");
    return PenaltySpec(PenaltyKind::MCP, lambda, a);
  }
  static PenaltySpec scad(double lambda, double a = 2.2) {
    if (!(a > 2.0)) throw std::invalid_argument("PenaltySpec: SCAD requires a > 2");
    return PenaltySpec(PenaltyKind::SCAD, lambda, a);
  }
  static PenaltySpec make(PenaltyKind kind, double lambda, double a = 2.2) {
    switch (kind) {
      case PenaltyKind::L1: return l1(lambda);
      case PenaltyKind::MCP: return mcp(lambda, a);
      case PenaltyKind::SCAD: return scad(lambda, a);
    }
    throw std::invalid_argument("PenaltySpec: unknown kind");
  }

  PenaltyKind kind() const { return kind_; }
  double lambda() const { return lambda_; }
  double a() const { return a_; }

  PenaltySpec with_lambda(double lambda) const { return PenaltySpec(kind_, lambda, a_); }

 private:
  PenaltySpec(PenaltyKind kind, double lambda, double a)
      : kind_(kind), lambda_(lambda), a_(a) {
    if (!(lambda >= 0.0)) throw std::invalid_argument("PenaltySpec: lambda must be >= 0");
  }

  PenaltyKind kind_;
  double lambda_;
  double a_;
};

/// Check loss rho_tau(u) = u * (tau - 1{u < 0}).
inline double check_loss(double u, Quantile tau) {
  return u < 0.0 ? u * (tau.tau() - 1.0) : u * tau.tau();
}

/// Penalty p_lambda(|beta|) for a single coordinate.
inline double penalty_value(const PenaltySpec& pen, double beta) {
  const double lambda = pen.lambda();
  const double b = std::abs(beta);
  switch (pen.kind()) {
    case PenaltyKind::L1:
      return lambda * b;
    case PenaltyKind::MCP: {
      if (lambda == 0.0) return 0.0;
      const double al = pen.a() * lambda;
      if (b < al) return lambda * (b - b * b / (2.0 * al));
      return al * lambda / 2.0;
    }
    case PenaltyKind::SCAD: {
      if (lambda == 0.0) return 0.0;
      const double a = pen.a();
      if (b < lambda) return lambda * b;
      if (b <= a * lambda) {
        return (a * lambda * b - (b * b + lambda * lambda) / 2.0) / (a - 1.0);
      }
      return (a + 1.0) * lambda * lambda / 2.0;
    }
  }
  return 0.0;
}

/// Full objective: sum of check losses over observations plus the penalty
/// summed over coordinates.
inline double objective(const Dataset& data, std::span<const double> beta, Quantile tau,
                        const PenaltySpec& pen) {
  if (beta.size() != static_cast<std::size_t>(data.p())) {
    throw std::invalid_argument("objective: beta length does not match p");
  }
  std::vector<double> resid(data.y());
  for (int j = 0; j < data.p(); ++j) {
    const double bj = beta[j];
    if (bj == 0.0) continue;
    const auto xj = data.x().col(j);
    for (int i = 0; i < data.n(); ++i) resid[i] -= xj[i] * bj;
  }
  double loss = 0.0;
  for (double r : resid) loss += check_loss(r, tau);
  double pen_sum = 0.0;
  for (double bj : beta) pen_sum += penalty_value(pen, bj);
  return loss + pen_sum;
}

}  // namespace qcd
