#pragma once

// The ladder transform phi1 and its machinery. phi1(T) is defined as the
// unique root y of
//
//     y ln y + (c - ln 2pi) y + c0 = J(T),
//
// whose left side is strictly increasing for y > exp(ln 2pi - 1 - c) ~ 1.3.
// Solves run bracketed Newton with bisection fallback and are driven to the
// rounding floor of the defining equation, far below the configured
// root_tol, so downstream identities cancel to ~1e-10 absolute.

#include <cfloat>
#include <cmath>
#include <string>
#include <vector>

#include "ladderlab/constants.hpp"
#include "ladderlab/errors.hpp"
#include "ladderlab/quadrature.hpp"

namespace ladderlab {

struct LadderConfig {
  Constants consts{};
  double c0 = 0.0;       // additive constant of the almost-exact representation
  double t_min = 100.0;  // domain floor for every ladder solve
  double root_tol = 1e-10;
  double quad_tol = 1e-8;
  int threads = 1;
  long long panel_budget = 100'000'000;

  QuadratureControl quad() const { return {quad_tol, threads, panel_budget}; }

  void validate() const {
    consts.validate();
    if (!(std::isfinite(c0)))
      throw validation_error("LadderConfig: c0 must be finite");
    if (!(t_min > std::exp(consts.ln_two_pi - 1.0 - consts.euler_c)))
      throw validation_error(
          "LadderConfig: t_min must exceed exp(ln 2pi - 1 - c) so the ladder "
          "equation is strictly increasing on the solve range");
    if (!(root_tol > 0.0) || !(quad_tol > 0.0))
      throw validation_error("LadderConfig: tolerances must be positive");
    if (threads < 1) throw validation_error("LadderConfig: threads must be >= 1");
  }
};

/// Left side of the defining equation: y ln y + (c - ln 2pi) y + c0.
inline double ladder_lhs(double y, const LadderConfig& cfg) {
  return y * std::log(y) + (cfg.consts.euler_c - cfg.consts.ln_two_pi) * y + cfg.c0;
}

/// d/dy of ladder_lhs: ln y + 1 + c - ln 2pi.
inline double ladder_lhs_derivative(double y, const LadderConfig& cfg) {
  return std::log(y) + 1.0 + cfg.consts.euler_c - cfg.consts.ln_two_pi;
}

namespace detail {

// Bracketed Newton for ladder_lhs(y) = target on [lo, hi]. The bracket is
// maintained throughout; Newton steps leaving it fall back to bisection.
// Iterates down to the argument's rounding floor: identities downstream get
// amplified by the pointwise slope Z^2/ln, so the root must be ulp-optimal.
inline double solve_ladder_lhs(double target, double lo, double hi, const LadderConfig& cfg) {
  double y = 0.5 * (lo + hi);
  double best_y = y;
  double best_resid = HUGE_VAL;
  for (int iter = 0; iter < 200; ++iter) {
    const double resid = ladder_lhs(y, cfg) - target;
    if (std::abs(resid) < best_resid) {
      best_resid = std::abs(resid);
      best_y = y;
    }
    if (resid == 0.0) return y;
    if (resid > 0.0)
      hi = y;
    else
      lo = y;
    if (hi - lo <= 2.0 * DBL_EPSILON * hi) break;  // bracket at the ulp floor
    double next = y - resid / ladder_lhs_derivative(y, cfg);
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    if (next == y) break;
    y = next;
  }
  if (best_resid > cfg.root_tol * std::max(1.0, std::abs(target)))
    throw precision_error("phi1: ladder equation solve stalled above root_tol");
  return best_y;
}

}  // namespace detail

/// The ladder transform. Requires T >= cfg.t_min; returns y < T.
inline double phi1(double T, CheckpointTable& table, const LadderConfig& cfg) {
  cfg.validate();
  if (!(std::isfinite(T) && T >= cfg.t_min))
    throw domain_error("phi1: requires T >= t_min = " + std::to_string(cfg.t_min));
  const double target = j_integral(T, table, cfg.quad_tol, cfg.quad()).value;
  // phi1(T) ~ T - (1-c) T/ln T; [T/2, T] brackets comfortably at any T >= t_min.
  return detail::solve_ladder_lhs(target, 0.5 * T, T, cfg);
}

/// Inverse ladder transform: the T > U with phi1(T) = U, solved on the
/// J-equation J(T) = ladder_lhs(U).
inline double phi1_inverse(double U, CheckpointTable& table, const LadderConfig& cfg) {
  cfg.validate();
  if (!(std::isfinite(U) && U >= cfg.t_min))
    throw domain_error("phi1_inverse: requires U >= t_min = " + std::to_string(cfg.t_min));
  const double target = ladder_lhs(U, cfg);
  const double one_minus_c = cfg.consts.one_minus_c();
  const auto j_at = [&](double T) { return j_integral(T, table, cfg.quad_tol, cfg.quad()).value; };

  double lo = U;
  double hi = U * (1.0 + 3.0 * one_minus_c / std::log(U));
  int expansions = 0;
  while (j_at(hi) < target) {
    hi *= 1.0 + 2.0 * one_minus_c / std::log(hi);
    if (++expansions > 64)
      throw precision_error("phi1_inverse: bracket expansion failed under the panel budget");
  }

  // Drive the solve to the ulp floor of T: J moves by Z(T)^2 per ulp, so
  // accepting an early residual would cost whole ulps in the argument and
  // tower identities amplify that by the local slope.
  double T = U * (1.0 + one_minus_c / std::log(U));
  if (!(T > lo && T < hi)) T = 0.5 * (lo + hi);
  double best_T = T;
  double best_resid = HUGE_VAL;
  for (int iter = 0; iter < 200; ++iter) {
    const double resid = j_at(T) - target;
    if (std::abs(resid) < best_resid) {
      best_resid = std::abs(resid);
      best_T = T;
    }
    if (resid == 0.0) return T;
    if (resid > 0.0)
      hi = T;
    else
      lo = T;
    if (hi - lo <= 2.0 * DBL_EPSILON * hi) break;  // bracket at the ulp floor
    const double slope = zeta_sq_modulus(T);
    double next = (slope > 1e-8) ? T - resid / slope : 0.5 * (lo + hi);
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    if (next == T) break;
    T = next;
  }
  if (best_resid > cfg.root_tol * std::max(1.0, std::abs(target)))
    throw precision_error("phi1_inverse: solve stalled above root_tol");
  return best_T;
}

/// A height with its reverse iterates T = levels[0] < levels[1] < ... and
/// the per-level consistency residuals |phi1(levels[r]) - levels[r-1]|.
struct ReverseTower {
  double base_T = 0.0;
  int k = 0;
  std::vector<double> levels;     // k + 1 entries, strictly increasing
  std::vector<double> residuals;  // k entries; residuals[r-1] belongs to level r
};

/// Builds the reverse tower by k applications of phi1_inverse and records
/// the round-trip residuals.
inline ReverseTower reverse_tower(double T, int k, CheckpointTable& table,
                                  const LadderConfig& cfg) {
  cfg.validate();
  if (k < 1 || k > 10) throw parameter_error("reverse_tower: requires 1 <= k <= 10");
  if (!(std::isfinite(T) && T >= cfg.t_min))
    throw domain_error("reverse_tower: requires T >= t_min");
  ReverseTower tower;
  tower.base_T = T;
  tower.k = k;
  tower.levels.push_back(T);
  for (int r = 1; r <= k; ++r) {
    double up = phi1_inverse(tower.levels.back(), table, cfg);
    if (!(up > tower.levels.back()))
      throw precision_error("reverse_tower: levels failed to increase");
    tower.levels.push_back(up);
    double resid = std::abs(phi1(up, table, cfg) - tower.levels[r - 1]);
    if (!(resid <= cfg.root_tol * up))
      throw precision_error("reverse_tower: residual above root_tol at level " +
                            std::to_string(r));
    tower.residuals.push_back(resid);
  }
  return tower;
}

/// Direct iterates [t, phi1(t), phi1(phi1(t)), ...] with k applications.
/// Errors out if any iterate falls below the domain floor.
inline std::vector<double> direct_iterate(double t, int k, CheckpointTable& table,
                                          const LadderConfig& cfg) {
  cfg.validate();
  if (k < 0) throw parameter_error("direct_iterate: requires k >= 0");
  if (!(std::isfinite(t) && t >= cfg.t_min)) throw domain_error("direct_iterate: t below t_min");
  std::vector<double> iterates{t};
  for (int i = 1; i <= k; ++i) {
    double next = phi1(iterates.back(), table, cfg);
    if (!(next >= cfg.t_min))
      throw domain_error("direct_iterate: iterate " + std::to_string(i) +
                         " fell below the domain floor");
    iterates.push_back(next);
  }
  return iterates;
}

/// phi1'(t) = Z(t)^2 / (ln phi1(t) + 1 + c - ln 2pi); zero exactly at the
/// zeros of Z.
inline double phi1_derivative(double t, CheckpointTable& table, const LadderConfig& cfg) {
  const double phi = phi1(t, table, cfg);
  return zeta_sq_modulus(t) / ladder_lhs_derivative(phi, cfg);
}

/// |Z~(t)| = sqrt(phi1'(t)), asymptotically |zeta(1/2+it)|/sqrt(ln t).
inline double z_tilde(double t, CheckpointTable& table, const LadderConfig& cfg) {
  return std::sqrt(phi1_derivative(t, table, cfg));
}

}  // namespace ladderlab
