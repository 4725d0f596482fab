#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "ladderlab/ladder.hpp"
#include "oracles.hpp"

using namespace ladderlab;

namespace {

// one table per binary run; heights here stay modest so the suite is quick
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

TEST_CASE("config validation") {
  LadderConfig cfg = test_cfg();
  CHECK_NOTHROW(cfg.validate());
  cfg.t_min = 1.0;  // below exp(ln 2pi - 1 - c) ~ 1.2978
  CHECK_THROWS_AS(cfg.validate(), validation_error);
  cfg = test_cfg();
  cfg.root_tol = 0.0;
  CHECK_THROWS_AS(cfg.validate(), validation_error);
  cfg = test_cfg();
  cfg.threads = 0;
  CHECK_THROWS_AS(cfg.validate(), validation_error);
}

TEST_CASE("phi1: defining residual at the root_tol scale") {
  LadderConfig cfg = test_cfg();
  auto& table = shared_table();
  double T = 1e4;
  double y = phi1(T, table, cfg);
  double target = j_integral(T, table, cfg.quad_tol, cfg.quad()).value;
  CHECK(std::abs(ladder_lhs(y, cfg) - target) <= 1e-10 * target);
  CHECK(y < T);
}

TEST_CASE("phi1: domain floor and monotonicity") {
  LadderConfig cfg = test_cfg();
  auto& table = shared_table();
  CHECK_THROWS_AS(phi1(99.0, table, cfg), domain_error);
  CHECK_THROWS_AS(phi1(-5.0, table, cfg), domain_error);
  CHECK(phi1(1e4, table, cfg) < phi1(1.1e4, table, cfg));
}

TEST_CASE("phi1: gap tracks (1-c) T / ln T to within 5%") {
  LadderConfig cfg = test_cfg();
  auto& table = shared_table();
  double T = 1e4;
  double gap = T - phi1(T, table, cfg);
  double ref = cfg.consts.one_minus_c() * T / std::log(T);
  CHECK(std::abs(gap / ref - 1.0) < 0.05);
}

TEST_CASE("phi1_inverse: round trip and expansion estimate") {
  LadderConfig cfg = test_cfg();
  auto& table = shared_table();
  double U = 1e4;
  double T = phi1_inverse(U, table, cfg);
  CHECK(T > U);
  CHECK(std::abs(phi1(T, table, cfg) - U) <= 1e-8 * U);
  double estimate = U * (1.0 + cfg.consts.one_minus_c() / std::log(U));
  CHECK(std::abs(T / estimate - 1.0) < 0.05);
  CHECK(phi1_inverse(1e4, table, cfg) < phi1_inverse(1.1e4, table, cfg));
  CHECK_THROWS_AS(phi1_inverse(10.0, table, cfg), domain_error);
}

TEST_CASE("phi1_inverse: round trip property on random heights") {
  LadderConfig cfg = test_cfg();
  auto& table = shared_table();
  std::mt19937 rng(99);
  std::uniform_real_distribution<double> pick(1e3, 2e4);
  for (int i = 0; i < 8; ++i) {
    double U = pick(rng);
    double T = phi1_inverse(U, table, cfg);
    CHECK(std::abs(phi1(T, table, cfg) - U) <= 1e-8 * U);
  }
}

TEST_CASE("reverse_tower: structure and residuals at T = 1e4, k = 3") {
  LadderConfig cfg = test_cfg();
  auto& table = shared_table();
  ReverseTower tower = reverse_tower(1e4, 3, table, cfg);
  REQUIRE(tower.levels.size() == 4);
  REQUIRE(tower.residuals.size() == 3);
  CHECK(tower.levels[0] == 1e4);
  for (int r = 1; r <= 3; ++r) {
    CHECK(tower.levels[r] > tower.levels[r - 1]);
    CHECK(tower.residuals[r - 1] <= cfg.root_tol * tower.levels[r]);
  }
  // asymptotically equivalent levels
  CHECK(tower.levels[3] / tower.levels[0] > 1.0);
  CHECK(tower.levels[3] / tower.levels[0] < 1.2);
  CHECK_THROWS_AS(reverse_tower(1e4, 0, table, cfg), parameter_error);
  CHECK_THROWS_AS(reverse_tower(1e4, 11, table, cfg), parameter_error);
}

TEST_CASE("reverse_tower: first gap against (1-c) pi(T^1)") {
  LadderConfig cfg = test_cfg();
  auto& table = shared_table();
  ReverseTower tower = reverse_tower(1e4, 2, table, cfg);
  double gap = tower.levels[1] - tower.levels[0];
  double denom = cfg.consts.one_minus_c() *
                 static_cast<double>(prime_count(tower.levels[1]));
  CHECK(gap / denom > 0.8);
  CHECK(gap / denom < 1.2);
}

TEST_CASE("direct_iterate: identities and domain floor") {
  LadderConfig cfg = test_cfg();
  auto& table = shared_table();
  auto single = direct_iterate(5e3, 0, table, cfg);
  REQUIRE(single.size() == 1);
  CHECK(single[0] == 5e3);

  // one direct application undoes one reverse iteration
  ReverseTower tower = reverse_tower(1e4, 1, table, cfg);
  auto back = direct_iterate(tower.levels[1], 1, table, cfg);
  CHECK(std::abs(back[1] - 1e4) <= cfg.root_tol * tower.levels[1]);

  auto chain = direct_iterate(1e4, 2, table, cfg);
  REQUIRE(chain.size() == 3);
  CHECK(chain[2] < chain[1]);
  CHECK(chain[1] < chain[0]);

  CHECK_THROWS_AS(direct_iterate(100.5, 3, table, cfg), domain_error);
  CHECK_THROWS_AS(direct_iterate(1e4, -1, table, cfg), parameter_error);
}

TEST_CASE("phi1_derivative: finite difference, zeros, algebraic identity") {
  LadderConfig cfg = test_cfg();
  auto& table = shared_table();

  // pick a height where |Z| is comfortably away from zero; the step must
  // stay well below the Z oscillation scale or the quotient averages phi1'
  double t_star = 1e4;
  while (std::abs(hardy_z(t_star)) < 1.0) t_star += 0.05;
  double d_analytic = phi1_derivative(t_star, table, cfg);
  double h = 0.004;
  double d_fd = (phi1(t_star + h, table, cfg) - phi1(t_star - h, table, cfg)) / (2.0 * h);
  CHECK(std::abs(d_analytic / d_fd - 1.0) < 1e-3);

  // at a zero of Z the derivative vanishes
  long double zero = oracle::bisect([](long double t) { return oracle::z_value(t); }, 10000.0L,
                                    10001.0L, 1e-13L);
  CHECK(phi1_derivative(static_cast<double>(zero), table, cfg) < 1e-10);

  // phi1'(t) * (ln phi1(t) + 1 + c - ln 2pi) = Z(t)^2 up to rounding
  double phi = phi1(t_star, table, cfg);
  double lhs = phi1_derivative(t_star, table, cfg) * ladder_lhs_derivative(phi, cfg);
  double rhs = zeta_sq_modulus(t_star);
  CHECK(std::abs(lhs - rhs) <= 4.0 * DBL_EPSILON * rhs);
}

TEST_CASE("z_tilde: definition and asymptotic scale") {
  LadderConfig cfg = test_cfg();
  auto& table = shared_table();
  double t = 1e4 + 0.37;
  double zt = z_tilde(t, table, cfg);
  CHECK(std::abs(zt * zt - phi1_derivative(t, table, cfg)) <=
        4.0 * DBL_EPSILON * std::max(1.0, zt * zt));

  // z_tilde * sqrt(ln t) tracks |Z| at points where |Z| > 1
  int checked = 0;
  for (double probe = 1e4; checked < 5; probe += 0.21) {
    double z = hardy_z(probe);
    if (std::abs(z) <= 1.0) continue;
    double ratio = z_tilde(probe, table, cfg) * std::sqrt(std::log(probe)) / std::abs(z);
    CHECK(ratio > 0.97);
    CHECK(ratio < 1.03);
    ++checked;
  }

  long double zero = oracle::bisect([](long double t2) { return oracle::z_value(t2); }, 10000.0L,
                                    10001.0L, 1e-13L);
  CHECK(z_tilde(static_cast<double>(zero), table, cfg) < 1e-5);
}

TEST_CASE("complementarity with (1-c) pi(T) at T = 1e4") {
  LadderConfig cfg = test_cfg();
  auto& table = shared_table();
  double T = 1e4;
  double phi = phi1(T, table, cfg);
  double ratio = (phi + cfg.consts.one_minus_c() * static_cast<double>(prime_count(T))) / T;
  CHECK(ratio > 0.98);
  CHECK(ratio < 1.02);
}
