#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "ladderlab/raabe.hpp"

using namespace ladderlab;

namespace {

CheckpointTable& shared_table() {
  static CheckpointTable table;
  return table;
}

LadderConfig test_cfg() {
  LadderConfig cfg;
  cfg.threads = 2;
  return cfg;
}

}  // namespace

TEST_CASE("raabe_integral: closed-form values") {
  CHECK(raabe_integral(1.0) == doctest::Approx(-0.0810614667953272582).epsilon(1e-12));
  // 10 ln 10 - 10 + ln sqrt(2 pi), by direct substitution
  CHECK(raabe_integral(10.0) == doctest::Approx(13.9447894631451296).epsilon(1e-14));
  CHECK_THROWS_AS(raabe_integral(0.0), domain_error);
  CHECK_THROWS_AS(raabe_integral(-1.0), domain_error);
}

TEST_CASE("raabe_integral_quadrature: against the closed form") {
  for (double a : {1.0, 0.5, 10.0, 1e3, 1e4, 1e5}) {
    IntegralResult r = raabe_integral_quadrature(a, 1e-10);
    CHECK(std::abs(r.value - raabe_integral(a)) < 1e-9);
    CHECK(r.err_bound <= 1e-10);
    CHECK(r.panels >= 1);
  }
  CHECK_THROWS_AS(raabe_integral_quadrature(-0.5, 1e-10), domain_error);
}

TEST_CASE("raabe_integral_quadrature: increasing in a for a >= 1") {
  CHECK(raabe_integral_quadrature(3.0, 1e-10).value > raabe_integral_quadrature(2.0, 1e-10).value);
}

TEST_CASE("increment decomposition at T = 1e4, k = 3") {
  LadderConfig cfg = test_cfg();
  auto& table = shared_table();
  DecompositionReport report = verify_increment_decomposition(1e4, 3, table, cfg);
  REQUIRE(report.rows.size() == 3);
  CHECK(report.base_T == 1e4);
  CHECK(report.k == 3);
  CHECK(report.constant_used == doctest::Approx(0.2606614).epsilon(1e-6));
  for (const auto& row : report.rows) {
    CHECK(std::abs(row.residual) <= 1e-6 * report.base_T);
    CHECK(row.gap > 0.0);
    CHECK(row.residual == row.lhs - row.rhs);
  }
  // row gap of row r is T^r - T^{r-1}
  CHECK(report.rows[0].gap ==
        doctest::Approx(report.tower.levels[1] - report.tower.levels[0]).epsilon(1e-14));
}

TEST_CASE("corollary residual equals the row-residual sum") {
  LadderConfig cfg = test_cfg();
  auto& table = shared_table();
  DecompositionReport report = verify_increment_decomposition(1e4, 3, table, cfg);
  double row_sum = 0.0;
  for (const auto& row : report.rows) row_sum += row.residual;
  double scale = std::max(std::abs(report.corollary_residual), std::abs(row_sum));
  CHECK(std::abs(report.corollary_residual - row_sum) <= 1e-12 * std::max(1.0, scale) + 1e-12);

  // the degenerate telescope: k = 1 collapses to the single row
  DecompositionReport single = verify_increment_decomposition(1e4, 1, table, cfg);
  CHECK(std::abs(single.corollary_residual - single.rows[0].residual) <= 1e-12);

  // corollary left side grows with k (nonnegative integrand, longer range)
  auto lhs_total = [](const DecompositionReport& r) {
    double s = 0.0;
    for (const auto& row : r.rows) s += row.lhs;
    return s;
  };
  DecompositionReport two = verify_increment_decomposition(1e4, 2, table, cfg);
  CHECK(lhs_total(report) > lhs_total(two));
}

TEST_CASE("verify_corollary_sum: standalone entry point") {
  LadderConfig cfg = test_cfg();
  auto& table = shared_table();
  double resid = verify_corollary_sum(1e4, 2, table, cfg);
  DecompositionReport report = verify_increment_decomposition(1e4, 2, table, cfg);
  CHECK(resid == report.corollary_residual);  // same deterministic pipeline
  CHECK_THROWS_AS(verify_corollary_sum(1e4, 0, table, cfg), parameter_error);
}

TEST_CASE("almost-linear increments at T = 1e4, k = 2") {
  LadderConfig cfg = test_cfg();
  auto& table = shared_table();
  auto rows = almost_linear_increment_check(1e4, 2, table, cfg);
  REQUIRE(rows.size() == 2);
  for (const auto& row : rows) {
    CHECK(row.increment > 0.0);
    CHECK(row.rel_dev < 0.05);
    CHECK(row.expected == doctest::Approx(cfg.consts.one_minus_c() * 1e4).epsilon(0.1));
  }
  CHECK_THROWS_AS(almost_linear_increment_check(1e4, 0, table, cfg), parameter_error);
}
