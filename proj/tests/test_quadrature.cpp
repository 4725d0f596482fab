#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>

#include "ladderlab/quadrature.hpp"
#include "oracles.hpp"

using namespace ladderlab;
namespace fs = std::filesystem;

namespace {

fs::path temp_file(const char* name) {
  fs::path p = fs::temp_directory_path() / name;
  fs::remove(p);
  return p;
}

}  // namespace

TEST_CASE("integrate_zeta_sq: degenerate and invalid intervals") {
  IntegralResult r = integrate_zeta_sq(100.0, 100.0, 1e-8);
  CHECK(r.value == 0.0);
  CHECK(r.err_bound == 0.0);
  CHECK(r.panels == 0);
  CHECK_THROWS_AS(integrate_zeta_sq(-1.0, 5.0, 1e-8), domain_error);
  CHECK_THROWS_AS(integrate_zeta_sq(5.0, 4.0, 1e-8), domain_error);
  CHECK_THROWS_AS(integrate_zeta_sq(0.0, 5.0, -1e-8), parameter_error);
}

TEST_CASE("integrate_zeta_sq: panel budget exhaustion raises precision_error") {
  QuadratureControl ctl;
  ctl.panel_budget = 10;  // not even one panel
  CHECK_THROWS_AS(integrate_zeta_sq(0.0, 50.0, 1e-8, ctl), precision_error);
}

TEST_CASE("integrate_zeta_sq: additivity on random triples in [0, 2000]") {
  std::mt19937 rng(2024);
  std::uniform_real_distribution<double> pick(0.0, 2000.0);
  for (int trial = 0; trial < 10; ++trial) {
    double u = pick(rng), v = pick(rng), w = pick(rng);
    double a = std::min({u, v, w}), c = std::max({u, v, w});
    double b = u + v + w - a - c;
    IntegralResult full = integrate_zeta_sq(a, c, 1e-8);
    IntegralResult left = integrate_zeta_sq(a, b, 1e-8);
    IntegralResult right = integrate_zeta_sq(b, c, 1e-8);
    CHECK(std::abs(full.value - left.value - right.value) <=
          full.err_bound + left.err_bound + right.err_bound + 1e-9);
  }
}

TEST_CASE("integrate_zeta_sq: [0, 100] against a fine-step Simpson oracle") {
  long double ref =
      oracle::simpson([](long double t) { return oracle::zeta_sq(t); }, 0.0L, 100.0L, 1e-4L);
  IntegralResult r = integrate_zeta_sq(0.0, 100.0, 1e-8);
  CHECK(std::abs(r.value - static_cast<double>(ref)) <= 1e-6 * static_cast<double>(ref));
  CHECK(r.panels >= 1);
}

TEST_CASE("integrate_zeta_sq: deterministic and thread-count independent") {
  IntegralResult serial = integrate_zeta_sq(50.0, 400.0, 1e-8);
  IntegralResult serial2 = integrate_zeta_sq(50.0, 400.0, 1e-8);
  CHECK(serial.value == serial2.value);
  CHECK(serial.err_bound == serial2.err_bound);
  QuadratureControl ctl;
  ctl.threads = 2;
  IntegralResult parallel = integrate_zeta_sq(50.0, 400.0, 1e-8, ctl);
  CHECK(parallel.value == serial.value);
  CHECK(parallel.err_bound == serial.err_bound);
  CHECK(parallel.panels == serial.panels);
}

TEST_CASE("j_integral: basics and checkpoint reuse") {
  CheckpointTable table;
  CHECK(j_integral(0.0, table, 1e-8).value == 0.0);

  IntegralResult first = j_integral(100.0, table, 1e-8);
  CHECK(first.value > 0.0);
  CHECK(first.panels >= 1);
  IntegralResult second = j_integral(100.0, table, 1e-8);
  CHECK(second.value == first.value);
  CHECK(second.panels == 0);

  CHECK_THROWS_AS(j_integral(-1.0, table, 1e-8), domain_error);
}

TEST_CASE("j_integral: value is canonical regardless of store content") {
  CheckpointTable warm;
  // warm the store along an awkward query sequence
  j_integral(350.0, warm, 1e-8);
  j_integral(1700.5, warm, 1e-8);
  j_integral(900.0, warm, 1e-8);
  CheckpointTable cold;
  for (double T : {250.0, 900.0, 1500.0, 1700.5}) {
    double a = j_integral(T, warm, 1e-8).value;
    double b = j_integral(T, cold, 1e-8).value;
    CHECK(a == b);
  }
}

TEST_CASE("j_integral: monotone in T") {
  CheckpointTable table;
  std::mt19937 rng(7);
  std::uniform_real_distribution<double> pick(0.0, 1500.0);
  for (int i = 0; i < 8; ++i) {
    double t1 = pick(rng), t2 = pick(rng);
    if (t1 > t2) std::swap(t1, t2);
    CHECK(j_integral(t1, table, 1e-8).value <= j_integral(t2, table, 1e-8).value);
  }
}

TEST_CASE("j_integral: T = 1000 lands near the classical main term") {
  CheckpointTable table;
  double j = j_integral(1000.0, table, 1e-8).value;
  CHECK(std::abs(j - hli_reference(1000.0)) < 0.05 * 1000.0);
}

TEST_CASE("hli_reference: pinned values") {
  CHECK(hli_reference(1.0) == doctest::Approx(-1.6834457).epsilon(1e-7));
  // root of the main term, frozen from bisection on T ln T - (1+ln 2pi - 2c) T
  CHECK(std::abs(hli_reference(5.38407615325514959)) < 1e-9);
  CHECK_THROWS_AS(hli_reference(0.0), domain_error);
  CHECK_THROWS_AS(hli_reference(-4.0), domain_error);
}

TEST_CASE("checkpoints: save/load round trip is bit exact") {
  CheckpointTable table;
  j_integral(100.0, table, 1e-8);
  j_integral(1250.0, table, 1e-8);
  auto path = temp_file("ladderlab_ckpt_roundtrip.csv");
  save_checkpoints(table, path);
  CheckpointTable loaded = load_checkpoints(path);
  auto a = table.snapshot();
  auto b = loaded.snapshot();
  REQUIRE(a.size() == b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i].t == b[i].t);
    CHECK(a[i].j == b[i].j);
    CHECK(a[i].err == b[i].err);
  }
  fs::remove(path);
}

TEST_CASE("checkpoints: load validates and names the offending row") {
  auto path = temp_file("ladderlab_ckpt_bad.csv");
  {
    std::ofstream out(path);
    out << "t,j,err\n";
    out << "1000,5.5e3,1e-9\n";
    out << "900,6.0e3,1e-9\n";
  }
  CHECK_THROWS_WITH_AS(static_cast<void>(load_checkpoints(path)),
                       doctest::Contains("row 1"), validation_error);
  {
    std::ofstream out(path);
    out << "t,j,err\n";
    out << "1000,5.5e3,1e-9\n";
    out << "1100,5.0e3,1e-9\n";  // j decreases
  }
  CHECK_THROWS_AS(static_cast<void>(load_checkpoints(path)), validation_error);
  fs::remove(path);
}

TEST_CASE("checkpoints: empty file loads as an empty, valid table") {
  auto path = temp_file("ladderlab_ckpt_empty.csv");
  { std::ofstream out(path); }
  CheckpointTable table = load_checkpoints(path);
  CHECK(table.size() == 0);
  CHECK(j_integral(50.0, table, 1e-8).value > 0.0);
  fs::remove(path);
}

TEST_CASE("checkpoints: missing file is an io_error") {
  CHECK_THROWS_AS(static_cast<void>(load_checkpoints("/nonexistent/nowhere.csv")), io_error);
}
