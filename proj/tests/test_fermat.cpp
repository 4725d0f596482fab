#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <set>
#include <tuple>

#include "ladderlab/fermat.hpp"

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

using Tuple = std::tuple<long long, long long, long long, int>;

std::set<Tuple> as_set(const std::vector<FermatRational>& v) {
  std::set<Tuple> out;
  for (const auto& fr : v) out.insert({fr.x, fr.y, fr.z, fr.n});
  return out;
}

// independent brute force in __int128 (adequate for z, n small)
std::set<Tuple> brute_force(double eps, int n_max, int z_max) {
  std::set<Tuple> out;
  for (int n = 3; n <= n_max; ++n) {
    for (long long z = 1; z <= z_max; ++z) {
      __int128 zn = 1;
      for (int i = 0; i < n; ++i) zn *= z;
      for (long long x = 1; x <= z; ++x) {
        for (long long y = 1; y <= z; ++y) {
          __int128 xn = 1, yn = 1;
          for (int i = 0; i < n; ++i) xn *= x;
          for (int i = 0; i < n; ++i) yn *= y;
          long double value = static_cast<long double>(xn + yn) / static_cast<long double>(zn);
          if (value > 1.0L - eps && value < 1.0L + eps) out.insert({x, y, z, n});
        }
      }
    }
  }
  return out;
}

}  // namespace

TEST_CASE("fermat_rationals: matches a brute-force oracle") {
  auto got = as_set(fermat_rationals(0.01, 4, 12));
  auto expect = brute_force(0.01, 4, 12);
  CHECK(got == expect);
}

TEST_CASE("fermat_rationals: the classic near miss is present") {
  auto list = fermat_rationals(0.01, 3, 10);
  auto set = as_set(list);
  CHECK(set.count({6, 8, 9, 3}) == 1);
  CHECK(set.count({8, 6, 9, 3}) == 1);  // closed under x <-> y
  for (const auto& fr : list) {
    if (fr.x == 6 && fr.y == 8) {
      CHECK(fr.num == 728);
      CHECK(fr.den == 729);
      CHECK(fr.value() == doctest::Approx(728.0 / 729.0).epsilon(1e-15));
    }
  }
  // (1,1,1,3) has value 2 and is excluded for any eps < 1
  CHECK(set.count({1, 1, 1, 3}) == 0);
}

TEST_CASE("fermat_rationals: exact non-equality, ordering, no duplicates") {
  auto list = fermat_rationals(0.05, 4, 15);
  CHECK(!list.empty());
  std::set<Tuple> seen;
  const FermatRational* prev = nullptr;
  for (const auto& fr : list) {
    CHECK(fr.exact_nonequal());
    CHECK(seen.insert({fr.x, fr.y, fr.z, fr.n}).second);  // no duplicates
    if (prev) {
      // sorted by |value - 1| ascending (exact comparison mirrored in double)
      CHECK(std::abs(prev->value() - 1.0) <= std::abs(fr.value() - 1.0) + 1e-15);
    }
    prev = &fr;
  }
}

TEST_CASE("fermat_rationals: parameter validation") {
  CHECK_THROWS_AS(fermat_rationals(0.0, 3, 10), parameter_error);
  CHECK_THROWS_AS(fermat_rationals(1.0, 3, 10), parameter_error);
  CHECK_THROWS_AS(fermat_rationals(0.01, 2, 10), parameter_error);
  CHECK_THROWS_AS(fermat_rationals(0.01, 3, 0), parameter_error);
}

TEST_CASE("ray height: increasing in x and tau") {
  LadderConfig cfg = test_cfg();
  CHECK(ray_height(1.0, 1e3, cfg) < ray_height(2.0, 1e3, cfg));
  CHECK(ray_height(1.0, 1e3, cfg) < ray_height(1.0, 2e3, cfg));
}

TEST_CASE("functional_zeta: domain and basic behavior") {
  LadderConfig cfg = test_cfg();
  auto& table = shared_table();
  CHECK_THROWS_AS(functional_zeta(-1.0, 1e3, table, cfg), domain_error);
  CHECK_THROWS_AS(functional_zeta(0.0, 1e3, table, cfg), domain_error);
  CHECK_THROWS_AS(functional_zeta(1.0, 10.0, table, cfg), domain_error);  // ray below t_min

  double tau = 800.0;
  double rho = ray_height(1.0, tau, cfg);
  double upper = phi1_inverse(rho, table, cfg);
  CHECK(upper > rho);  // integration range is nonempty
  double value = functional_zeta(1.0, tau, table, cfg);
  CHECK(value == doctest::Approx(1.0).epsilon(0.05));
}

TEST_CASE("functional_raabe: domain and basic behavior") {
  LadderConfig cfg = test_cfg();
  auto& table = shared_table();
  CHECK_THROWS_AS(functional_raabe(-2.0, 1e3, table, cfg), domain_error);
  double value = functional_raabe(1.0, 1e3, table, cfg);
  CHECK(value == doctest::Approx(1.0).epsilon(0.10));
}

TEST_CASE("convergence_trace: validation and structure") {
  LadderConfig cfg = test_cfg();
  auto& table = shared_table();
  CHECK_THROWS_AS(convergence_trace(1.0, {1e3, 1e4}, FunctionalVariant::raabe_difference,
                                    table, cfg),
                  parameter_error);
  CHECK_THROWS_AS(convergence_trace(1.0, {1e3, 1e3, 1e4}, FunctionalVariant::raabe_difference,
                                    table, cfg),
                  parameter_error);

  std::vector<double> grid{500.0, 1000.0, 2000.0};
  FunctionalTrace trace =
      convergence_trace(1.0, grid, FunctionalVariant::raabe_difference, table, cfg);
  REQUIRE(trace.points.size() == 3);
  CHECK(trace.target_x == 1.0);
  for (std::size_t i = 0; i < 3; ++i) {
    CHECK(trace.points[i].tau == grid[i]);
    CHECK(trace.points[i].residual == trace.points[i].value - 1.0);
    CHECK(std::isfinite(trace.points[i].residual));
  }
}

TEST_CASE("equivalence_report: validation and substitution consistency") {
  LadderConfig cfg = test_cfg();
  auto& table = shared_table();
  auto rationals = fermat_rationals(0.01, 3, 10);
  REQUIRE(!rationals.empty());
  std::vector<double> grid{500.0, 1000.0, 2000.0};

  CHECK_THROWS_AS(
      equivalence_report({}, grid, FunctionalVariant::raabe_difference, table, cfg),
      parameter_error);
  CHECK_THROWS_AS(
      equivalence_report(rationals, {}, FunctionalVariant::raabe_difference, table, cfg),
      parameter_error);

  std::vector<FermatRational> one{rationals.front()};
  EquivalenceReport report =
      equivalence_report(one, grid, FunctionalVariant::raabe_difference, table, cfg);
  REQUIRE(report.entries.size() == 1);
  const auto& entry = report.entries[0];

  // evaluated at a Fermat rational equals convergence_trace at the equal
  // real target, point for point
  FunctionalTrace direct = convergence_trace(one[0].value(), grid,
                                             FunctionalVariant::raabe_difference, table, cfg);
  for (std::size_t i = 0; i < 3; ++i) {
    CHECK(entry.trace.points[i].value == direct.points[i].value);
    CHECK(entry.trace.points[i].residual == direct.points[i].residual);
  }
  CHECK(entry.band >= 0.0);
}
