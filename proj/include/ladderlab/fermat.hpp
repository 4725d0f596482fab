#pragma once

// Finite-height evaluation of the two limit functionals along rays
// rho = x tau / (1 - c), exact enumeration of Fermat rationals, residual
// model fits, and the desk-scale evidence report. Nothing here decides the
// limit condition; reports carry explicit error bands and a three-way flag.

#include <algorithm>
#include <boost/multiprecision/cpp_int.hpp>
#include <cmath>
#include <string>
#include <vector>

#include "ladderlab/errors.hpp"
#include "ladderlab/ladder.hpp"
#include "ladderlab/quadrature.hpp"
#include "ladderlab/raabe.hpp"

namespace ladderlab {

using bigint = boost::multiprecision::cpp_int;

/// (x^n + y^n)/z^n held exactly, with its real rendering.
struct FermatRational {
  long long x = 0, y = 0, z = 0;
  int n = 0;
  bigint num, den;  // x^n + y^n and z^n

  double value() const { return num.convert_to<double>() / den.convert_to<double>(); }
  bool exact_nonequal() const { return num != den; }
};

/// Ray parameter rho(tau) = x tau / (1 - c).
inline double ray_height(double x, double tau, const LadderConfig& cfg) {
  return x * tau / cfg.consts.one_minus_c();
}

/// (1/tau) * integral of |zeta(1/2+it)|^2 over [rho, phi1^{-1}(rho)].
inline double functional_zeta(double x, double tau, CheckpointTable& table,
                              const LadderConfig& cfg) {
  cfg.validate();
  if (!(std::isfinite(x) && x > 0.0)) throw domain_error("functional_zeta: requires x > 0");
  if (!(std::isfinite(tau) && tau > 0.0)) throw domain_error("functional_zeta: requires tau > 0");
  const double rho = ray_height(x, tau, cfg);
  if (!(rho >= cfg.t_min)) throw domain_error("functional_zeta: ray height below t_min");
  const double upper = phi1_inverse(rho, table, cfg);
  const double lower_j = j_integral(rho, table, cfg.quad_tol, cfg.quad()).value;
  const double upper_j = j_integral(upper, table, cfg.quad_tol, cfg.quad()).value;
  return (upper_j - lower_j) / tau;
}

/// (1/tau) * [Raabe(rho) - Raabe(phi1(rho))], Raabe in closed form.
inline double functional_raabe(double x, double tau, CheckpointTable& table,
                               const LadderConfig& cfg) {
  cfg.validate();
  if (!(std::isfinite(x) && x > 0.0)) throw domain_error("functional_raabe: requires x > 0");
  if (!(std::isfinite(tau) && tau > 0.0)) throw domain_error("functional_raabe: requires tau > 0");
  const double rho = ray_height(x, tau, cfg);
  if (!(rho >= cfg.t_min)) throw domain_error("functional_raabe: ray height below t_min");
  const double phi = phi1(rho, table, cfg);
  return (raabe_integral(rho) - raabe_integral(phi)) / tau;
}

enum class FunctionalVariant { zeta_integral, raabe_difference };

inline const char* to_string(FunctionalVariant v) {
  return v == FunctionalVariant::zeta_integral ? "zeta_integral" : "raabe_difference";
}

struct TracePoint {
  double tau = 0.0;
  double value = 0.0;
  double residual = 0.0;  // value - target_x
};

struct ResidualFit {
  double C = 0.0;
  double quality = 0.0;  // in [0, 1]; 0 marks an invalid fit
};

/// (tau, value, residual) sequence for one target, with the fitted residual
/// model: C / ln(rho) for the Raabe difference, C rho^{1/3}/tau for the
/// zeta integral.
struct FunctionalTrace {
  double target_x = 0.0;
  FunctionalVariant variant = FunctionalVariant::raabe_difference;
  std::vector<TracePoint> points;
  ResidualFit fit;
};

namespace detail {

inline double residual_model(FunctionalVariant variant, double x, double tau,
                             const LadderConfig& cfg) {
  const double rho = ray_height(x, tau, cfg);
  if (variant == FunctionalVariant::raabe_difference) return 1.0 / std::log(rho);
  return std::cbrt(rho) / tau;
}

// C comes from least squares on log residuals with the model exponent
// fixed; quality is the squared log-log correlation between |residual| and
// the model, clamped to [0, 1]. The fit is marked invalid (quality 0) when
// the residuals are non-monotone in both sign and magnitude; a sign flip at
// the smallest tau alone (remainder oscillation passing through zero) keeps
// the magnitude trend usable. Desk-scale remainder oscillation contaminates
// the smallest-tau point, which is why quality measures trend strength
// rather than a fixed-slope R^2.
inline ResidualFit fit_residuals(const FunctionalTrace& trace, const LadderConfig& cfg) {
  ResidualFit fit;
  const auto& pts = trace.points;
  bool signs_uniform = true;
  bool magnitudes_monotone = true;
  double prev_mag = HUGE_VAL;
  const double last = pts.back().residual;
  for (const auto& p : pts) {
    if (!std::isfinite(p.residual) || p.residual == 0.0) return fit;
    if (p.residual * last <= 0.0) signs_uniform = false;
    const double mag = std::abs(p.residual);
    if (mag > prev_mag) magnitudes_monotone = false;
    prev_mag = mag;
  }
  if (!signs_uniform && !magnitudes_monotone) return fit;

  const std::size_t n = pts.size();
  std::vector<double> y(n), xs(n);
  double offset_sum = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    y[i] = std::log(std::abs(pts[i].residual));
    xs[i] = std::log(residual_model(trace.variant, trace.target_x, pts[i].tau, cfg));
    offset_sum += y[i] - xs[i];
  }
  fit.C = (last > 0.0 ? 1.0 : -1.0) * std::exp(offset_sum / static_cast<double>(n));

  double y_mean = 0.0, x_mean = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    y_mean += y[i];
    x_mean += xs[i];
  }
  y_mean /= static_cast<double>(n);
  x_mean /= static_cast<double>(n);
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sxy += (xs[i] - x_mean) * (y[i] - y_mean);
    sxx += (xs[i] - x_mean) * (xs[i] - x_mean);
    syy += (y[i] - y_mean) * (y[i] - y_mean);
  }
  if (sxx > 1e-300 && syy > 1e-300) {
    if (sxy > 0.0)  // residual must shrink with the model, not grow
      fit.quality = std::clamp(sxy * sxy / (sxx * syy), 0.0, 1.0);
  } else {
    fit.quality = syy <= 1e-300 ? 1.0 : 0.0;
  }
  return fit;
}

}  // namespace detail

/// Evaluates the chosen functional along an increasing tau grid and fits
/// the variant's residual model.
inline FunctionalTrace convergence_trace(double x, const std::vector<double>& tau_grid,
                                         FunctionalVariant variant, CheckpointTable& table,
                                         const LadderConfig& cfg) {
  if (tau_grid.size() < 3)
    throw parameter_error("convergence_trace: need at least 3 grid points");
  for (std::size_t i = 1; i < tau_grid.size(); ++i)
    if (!(tau_grid[i] > tau_grid[i - 1]))
      throw parameter_error("convergence_trace: tau grid must be strictly increasing");
  FunctionalTrace trace;
  trace.target_x = x;
  trace.variant = variant;
  for (double tau : tau_grid) {
    TracePoint p;
    p.tau = tau;
    p.value = variant == FunctionalVariant::zeta_integral
                  ? functional_zeta(x, tau, table, cfg)
                  : functional_raabe(x, tau, table, cfg);
    p.residual = p.value - x;
    trace.points.push_back(p);
  }
  trace.fit = detail::fit_residuals(trace, cfg);
  return trace;
}

/// All (x, y, z, n) with 3 <= n <= n_max, 1 <= x, y <= z <= z_max whose exact
/// rational value lies in (1-eps, 1+eps). Closed under the x <-> y symmetry,
/// deduplicated, sorted by |value - 1| ascending. All comparisons are exact:
/// eps is decomposed into integer mantissa times power of two.
inline std::vector<FermatRational> fermat_rationals(double eps, int n_max, int z_max) {
  if (!(eps > 0.0 && eps < 1.0)) throw parameter_error("fermat_rationals: requires 0 < eps < 1");
  if (n_max < 3) throw parameter_error("fermat_rationals: requires n_max >= 3");
  if (z_max < 1) throw parameter_error("fermat_rationals: requires z_max >= 1");
  if (n_max > 64 || z_max > 2000)
    throw parameter_error("fermat_rationals: enumeration capped at n_max <= 64, z_max <= 2000");

  int e2 = 0;
  const double frac = std::frexp(eps, &e2);       // eps = frac * 2^e2, frac in [0.5, 1)
  const bigint mant = static_cast<long long>(std::ldexp(frac, 53));  // exact
  const int shift = 53 - e2;                      // eps = mant / 2^shift, shift >= 53

  std::vector<FermatRational> out;
  for (int n = 3; n <= n_max; ++n) {
    std::vector<bigint> pow_n(static_cast<std::size_t>(z_max) + 1);
    for (int v = 1; v <= z_max; ++v) {
      bigint p = 1;
      for (int i = 0; i < n; ++i) p *= v;
      pow_n[static_cast<std::size_t>(v)] = p;
    }
    for (int z = 1; z <= z_max; ++z) {
      const bigint& den = pow_n[static_cast<std::size_t>(z)];
      const bigint bound = mant * den;
      for (int x = 1; x <= z; ++x) {
        for (int y = x; y <= z; ++y) {
          bigint num = pow_n[static_cast<std::size_t>(x)] + pow_n[static_cast<std::size_t>(y)];
          if (num == den)
            throw std::logic_error("fermat_rationals: exact equality x^n + y^n = z^n");
          bigint dist = num > den ? num - den : den - num;
          if ((dist << shift) < bound) {
            FermatRational fr{x, y, z, n, num, den};
            out.push_back(fr);
            if (x != y) {
              FermatRational mirror{y, x, z, n, std::move(num), den};
              out.push_back(std::move(mirror));
            }
          }
        }
      }
    }
  }
  std::sort(out.begin(), out.end(), [](const FermatRational& a, const FermatRational& b) {
    const bigint da = a.num > a.den ? a.num - a.den : a.den - a.num;
    const bigint db = b.num > b.den ? b.num - b.den : b.den - b.num;
    const bigint lhs = da * b.den;
    const bigint rhs = db * a.den;
    if (lhs != rhs) return lhs < rhs;
    return std::tie(a.n, a.z, a.x, a.y) < std::tie(b.n, b.z, b.x, b.y);
  });
  return out;
}

enum class EquivalenceFlag { distinguishable, indistinguishable, inconclusive };

inline const char* to_string(EquivalenceFlag f) {
  switch (f) {
    case EquivalenceFlag::distinguishable: return "distinguishable";
    case EquivalenceFlag::indistinguishable: return "indistinguishable at desk scale";
    default: return "inconclusive";
  }
}

struct EquivalenceEntry {
  FermatRational rational;
  FunctionalTrace trace;
  double band = 0.0;                // finite-tau error band at the largest tau
  double extrapolated_limit = 0.0;  // last value minus the fitted model term
  EquivalenceFlag flag = EquivalenceFlag::inconclusive;
};

struct EquivalenceReport {
  FunctionalVariant variant = FunctionalVariant::raabe_difference;
  std::vector<EquivalenceEntry> entries;
};

/// Evidence table for the limit-avoids-1 condition: one trace per rational
/// with target equal to its exact value, an error band, and a flag. Evidence
/// only, never a proof; a rational whose distance to 1 sits inside the band
/// is flagged indistinguishable at desk scale.
inline EquivalenceReport equivalence_report(const std::vector<FermatRational>& rationals,
                                            const std::vector<double>& tau_grid,
                                            FunctionalVariant variant, CheckpointTable& table,
                                            const LadderConfig& cfg) {
  if (rationals.empty()) throw parameter_error("equivalence_report: no rationals given");
  if (tau_grid.empty()) throw parameter_error("equivalence_report: empty tau grid");
  EquivalenceReport report;
  report.variant = variant;
  for (const FermatRational& fr : rationals) {
    EquivalenceEntry entry;
    entry.rational = fr;
    const double target = fr.value();
    entry.trace = convergence_trace(target, tau_grid, variant, table, cfg);
    const auto& pts = entry.trace.points;
    const double m_last = detail::residual_model(variant, target, pts.back().tau, cfg);
    double max_abs_res = 0.0;
    for (const auto& p : pts) max_abs_res = std::max(max_abs_res, std::abs(p.residual));
    const bool fit_valid = entry.trace.fit.quality > 0.0;
    entry.band = fit_valid ? std::abs(entry.trace.fit.C) * m_last : 2.0 * max_abs_res;
    entry.extrapolated_limit =
        pts.back().value - (fit_valid ? entry.trace.fit.C * m_last : 0.0);
    const double dist = std::abs(target - 1.0);
    if (dist <= 2.0 * entry.band)
      entry.flag = EquivalenceFlag::indistinguishable;
    else if (std::abs(entry.extrapolated_limit - 1.0) >= 0.5 * dist)
      entry.flag = EquivalenceFlag::distinguishable;
    else
      entry.flag = EquivalenceFlag::inconclusive;
    report.entries.push_back(std::move(entry));
  }
  return report;
}

}  // namespace ladderlab
