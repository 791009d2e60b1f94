#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "qcd/core.hpp"
#include "qcd/normal.hpp"
#include "qcd/rng.hpp"

using namespace qcd;

namespace {

// Direct row-wise evaluation of the penalized objective, written from the
// formula and independent of qcd::objective's column-scan path.
double objective_by_rows(const Dataset& data, const std::vector<double>& beta, double tau,
                         const PenaltySpec& pen) {
  double total = 0.0;
  for (int i = 0; i < data.n(); ++i) {
    double fit = 0.0;
    for (int j = 0; j < data.p(); ++j) fit += data.x()(i, j) * beta[j];
    const double u = data.y()[i] - fit;
    total += u * (tau - (u < 0.0 ? 1.0 : 0.0));
  }
  for (double b : beta) total += penalty_value(pen, b);
  return total;
}

Dataset random_dataset(Rng& rng, int n, int p) {
  Matrix x(n, p);
  std::vector<double> y(n);
  for (int j = 0; j < p; ++j) {
    for (int i = 0; i < n; ++i) x(i, j) = rng.normal();
  }
  for (int i = 0; i < n; ++i) y[i] = rng.normal();
  return Dataset(std::move(x), std::move(y));
}

}  // namespace

TEST_CASE("check loss matches its definition") {
  CHECK(check_loss(0.0, Quantile(0.3)) == 0.0);
  CHECK(check_loss(2.0, Quantile(0.5)) == 1.0);
  CHECK(check_loss(-1.0, Quantile(0.3)) == Catch::Approx(0.7));
}

TEST_CASE("check loss is positively homogeneous and reflects") {
  Rng rng(7);
  for (int rep = 0; rep < 200; ++rep) {
    const double u = 3.0 * rng.normal();
    const double k = std::abs(rng.normal()) + 0.1;
    const double tau = 0.05 + 0.9 * rng.uniform();
    const Quantile q(tau);
    CHECK(check_loss(k * u, q) == Catch::Approx(k * check_loss(u, q)).margin(1e-12));
    CHECK(check_loss(-u, q) == Catch::Approx(check_loss(u, Quantile(1.0 - tau))).margin(1e-14));
    CHECK(check_loss(u, q) >= 0.0);
  }
}

TEST_CASE("quantile level rejects boundary values") {
  CHECK_THROWS_AS(Quantile(0.0), std::invalid_argument);
  CHECK_THROWS_AS(Quantile(1.0), std::invalid_argument);
  CHECK_THROWS_AS(Quantile(-0.2), std::invalid_argument);
  CHECK(Quantile(0.5).tau() == 0.5);
}

TEST_CASE("penalty spec validates its shape parameter") {
  CHECK_THROWS_AS(PenaltySpec::l1(-1.0), std::invalid_argument);
  CHECK_THROWS_AS(PenaltySpec::mcp(1.0, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(PenaltySpec::scad(1.0, 2.0), std::invalid_argument);
  CHECK(PenaltySpec::mcp(1.0, 1.5).a() == 1.5);
  CHECK(PenaltySpec::scad(1.0).a() == 2.2);
}

TEST_CASE("dataset invariants") {
  Matrix x(2, 2);
  x(0, 0) = 1.0;
  CHECK_THROWS_AS(Dataset(x, std::vector<double>{1.0}), std::invalid_argument);
  Matrix bad(1, 1);
  bad(0, 0) = std::numeric_limits<double>::infinity();
  CHECK_THROWS_AS(Dataset(bad, std::vector<double>{1.0}), std::invalid_argument);
}

TEST_CASE("objective at beta = 0 with lambda = 0 is the raw check loss of y") {
  Rng rng(11);
  const Dataset data = random_dataset(rng, 9, 4);
  const Quantile q(0.3);
  std::vector<double> beta(4, 0.0);
  double expected = 0.0;
  for (double yi : data.y()) expected += check_loss(yi, q);
  CHECK(objective(data, beta, q, PenaltySpec::l1(0.0)) == Catch::Approx(expected));
}

TEST_CASE("objective vanishes at a perfect fit with lambda = 0") {
  Rng rng(12);
  Matrix x(6, 2);
  for (int j = 0; j < 2; ++j) {
    for (int i = 0; i < 6; ++i) x(i, j) = rng.normal();
  }
  const std::vector<double> beta{1.25, -0.5};
  std::vector<double> y(6);
  for (int i = 0; i < 6; ++i) y[i] = x(i, 0) * beta[0] + x(i, 1) * beta[1];
  const Dataset data(std::move(x), std::move(y));
  CHECK(objective(data, beta, Quantile(0.7), PenaltySpec::l1(0.0)) ==
        Catch::Approx(0.0).margin(1e-12));
}

TEST_CASE("objective matches an independent direct summation") {
  Rng rng(13);
  const Dataset data = random_dataset(rng, 5, 3);
  std::vector<double> beta{0.4, -1.1, 0.3};
  const PenaltySpec pen = PenaltySpec::l1(0.5);
  CHECK(objective(data, beta, Quantile(0.3), pen) ==
        Catch::Approx(objective_by_rows(data, beta, 0.3, pen)).margin(1e-12));
}

TEST_CASE("penalties agree at lambda = 0") {
  Rng rng(14);
  const Dataset data = random_dataset(rng, 8, 3);
  std::vector<double> beta{0.4, -1.1, 0.3};
  const Quantile q(0.4);
  const double l1 = objective(data, beta, q, PenaltySpec::l1(0.0));
  CHECK(objective(data, beta, q, PenaltySpec::mcp(0.0, 2.2)) == l1);
  CHECK(objective(data, beta, q, PenaltySpec::scad(0.0, 2.2)) == l1);
}

TEST_CASE("objective is coordinatewise convex for L1") {
  Rng rng(15);
  const Dataset data = random_dataset(rng, 10, 4);
  const Quantile q(0.3);
  const PenaltySpec pen = PenaltySpec::l1(0.6);
  for (int rep = 0; rep < 50; ++rep) {
    std::vector<double> beta(4);
    for (double& b : beta) b = rng.normal();
    const int j = static_cast<int>(rng.uniform() * 4);
    const double lo = beta[j] - std::abs(rng.normal()) - 0.1;
    const double hi = beta[j] + std::abs(rng.normal()) + 0.1;
    auto at = [&](double bj) {
      beta[j] = bj;
      return objective(data, beta, q, pen);
    };
    const double f_lo = at(lo);
    const double f_hi = at(hi);
    const double f_mid = at((lo + hi) / 2.0);
    CHECK(f_mid <= (f_lo + f_hi) / 2.0 + 1e-10);
  }
}

TEST_CASE("normal quantile inverts the CDF to high accuracy") {
  // independent check: bisection on normal_cdf, which is erfc-based
  auto bisect = [](double prob) {
    double lo = -10.0, hi = 10.0;
    for (int it = 0; it < 200; ++it) {
      const double mid = (lo + hi) / 2.0;
      (normal_cdf(mid) < prob ? lo : hi) = mid;
    }
    return (lo + hi) / 2.0;
  };
  for (double prob : {0.001, 0.025, 0.1, 0.3, 0.5, 0.7, 0.9, 0.975, 0.999}) {
    CHECK(normal_quantile(prob) == Catch::Approx(bisect(prob)).margin(1e-12));
  }
  CHECK(normal_quantile(0.5) == 0.0);
  CHECK_THROWS_AS(normal_quantile(0.0), std::invalid_argument);
  CHECK_THROWS_AS(normal_quantile(1.0), std::invalid_argument);
}

TEST_CASE("rng replays deterministically and has sane moments") {
  Rng a(42), b(42);
  for (int i = 0; i < 100; ++i) CHECK(a.normal() == b.normal());

  Rng rng(123);
  double sum = 0.0, sq = 0.0;
  const int draws = 200000;
  for (int i = 0; i < draws; ++i) {
    const double z = rng.normal();
    sum += z;
    sq += z * z;
  }
  const double mean = sum / draws;
  const double var = sq / draws - mean * mean;
  CHECK(std::abs(mean) < 0.01);
  CHECK(var == Catch::Approx(1.0).margin(0.02));
}
