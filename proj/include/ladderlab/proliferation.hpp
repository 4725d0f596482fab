#pragma once

// The generating operator on L2-orthogonal systems, specialized to the
// Legendre family: interval automorphisms u_p built from p-fold ladder
// applications over the reverse-iterate windows [T^p, (T+2)^p], the window
// maps v_p^r, proliferated functions, and numerical Gram certification.
//
// Ladder applications inside a window are served by a per-level fine grid of
// cumulative J values, so a single proliferated-function evaluation costs a
// couple of quadrature panels instead of a walk from the last checkpoint.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <utility>
#include <vector>

#include "ladderlab/errors.hpp"
#include "ladderlab/ladder.hpp"
#include "ladderlab/quadrature.hpp"

namespace ladderlab {

/// Legendre polynomial P_n(t) on [-1, 1] by the three-term recurrence.
inline double legendre_eval(int n, double t) {
  if (n < 0) throw domain_error("legendre_eval: requires n >= 0");
  if (!(std::isfinite(t) && std::abs(t) <= 1.0 + 1e-12))
    throw domain_error("legendre_eval: requires t in [-1, 1]");
  if (n == 0) return 1.0;
  double p0 = 1.0, p1 = t;
  for (int k = 2; k <= n; ++k) {
    double p2 = ((2.0 * k - 1.0) * t * p1 - (k - 1.0) * p0) / k;
    p0 = p1;
    p1 = p2;
  }
  return p1;
}

struct ProliferationSpec {
  double base_T = 1e4;
  std::vector<int> generations;  // p_1 .. p_s, innermost map is u_{p_s}
  int N = 6;                     // functions 0 .. N-1
  int quad_order = 16;           // Gram panels use embedded GL16/GL8

  void validate(const LadderConfig& cfg) const {
    if (generations.empty())
      throw parameter_error("ProliferationSpec: at least one generation required");
    if (generations.size() > 4)
      throw parameter_error("ProliferationSpec: desk scale caps the chain at s <= 4");
    for (int p : generations)
      if (p < 1 || p > 10)
        throw parameter_error("ProliferationSpec: generation indices must lie in [1, 10]");
    if (N < 1) throw parameter_error("ProliferationSpec: N >= 1");
    if (!(base_T >= cfg.t_min)) throw domain_error("ProliferationSpec: base_T below t_min");
  }
};

struct GramResult {
  int n = 0;
  std::vector<double> matrix;  // row-major n x n, symmetric
  std::vector<double> diag;
  double max_offdiag_normalized = 0.0;
};

class ProliferationEngine {
 public:
  ProliferationEngine(ProliferationSpec spec, CheckpointTable& table, const LadderConfig& cfg)
      : spec_(std::move(spec)), cfg_(cfg), table_(table) {
    cfg_.validate();
    spec_.validate(cfg_);
    max_p_ = *std::max_element(spec_.generations.begin(), spec_.generations.end());
    tower_lo_ = reverse_tower(spec_.base_T, max_p_, table_, cfg_);
    tower_hi_ = reverse_tower(spec_.base_T + 2.0, max_p_, table_, cfg_);
    windows_.resize(static_cast<std::size_t>(max_p_) + 1);
    for (int level = 1; level <= max_p_; ++level) build_window(level);
  }

  const ReverseTower& tower_low() const { return tower_lo_; }
  const ReverseTower& tower_high() const { return tower_hi_; }

  /// Affine map of [-1, 1] onto the level-p window [T^p, (T+2)^p].
  double window_affine(int p, double t) const {
    check_p(p);
    const double lo = tower_lo_.levels[static_cast<std::size_t>(p)];
    const double hi = tower_hi_.levels[static_cast<std::size_t>(p)];
    return 0.5 * (hi - lo) * (t + 1.0) + lo;
  }

  /// v_p^r(t): affine into the level-p window followed by r ladder steps;
  /// lands in the level (p - r) window.
  double v_map(int p, int r, double t) const {
    check_p(p);
    if (r < 0 || r >= p) throw parameter_error("v_map: requires 0 <= r <= p-1");
    check_t(t);
    double w = window_affine(p, t);
    for (int j = 0; j < r; ++j) w = ladder_step(p - j, w);
    return w;
  }

  /// u_p(t): p-fold ladder application of the affine image, recentered to
  /// [-1, 1]. Exact at the endpoints up to the solve tolerance.
  double u_map(int p, double t) const {
    check_p(p);
    check_t(t);
    double w = window_affine(p, t);
    for (int level = p; level >= 1; --level) w = ladder_step(level, w);
    return w - spec_.base_T - 1.0;
  }

  /// Proliferated function f_n^{p_1..p_s}(t).
  double proliferate(int n, double t) const {
    if (n < 0 || n >= spec_.N) throw parameter_error("proliferate: requires 0 <= n < N");
    check_t(t);
    double w = t, prod = 1.0;
    std::uint64_t signs = 0;
    eval_chain(t, &w, &prod, &signs);
    return legendre_eval(n, w) * prod;
  }

  /// Gram matrix of the first N proliferated functions over [-1, 1] by
  /// adaptive panels, split at detected sign changes of Z inside the
  /// absolute-value factors. Assembly order is deterministic.
  GramResult gram_matrix() const {
    const int n = spec_.N;
    const std::size_t nn = static_cast<std::size_t>(n) * n;
    std::vector<detail::NeumaierSum> acc(nn);
    long long evals = 0;

    const double cap = panel_cap();
    std::vector<std::pair<double, double>> stack;
    std::vector<std::pair<double, double>> pending;
    for (double t = -1.0; t < 1.0;) {
      double next = std::min(t + cap, 1.0);
      pending.emplace_back(t, next);
      t = next;
    }
    // process initial panels left to right; each refines depth-first
    std::vector<double> g16(nn), g8(nn), f(static_cast<std::size_t>(n));
    for (auto& base : pending) {
      stack.push_back(base);
      while (!stack.empty()) {
        auto [a, b] = stack.back();
        stack.pop_back();
        evals += 24;
        if (evals > cfg_.panel_budget)
          throw precision_error("gram_matrix: evaluation budget exhausted");
        bool kink = false;
        panel_moments(a, b, detail::kGl16X, detail::kGl16W, 8, g16, f, &kink);
        panel_moments(a, b, detail::kGl8X, detail::kGl8W, 4, g8, f, nullptr);
        double est = 0.0;
        for (std::size_t i = 0; i < nn; ++i) est = std::max(est, std::abs(g16[i] - g8[i]));
        const bool force_split = kink && (b - a) > 1e-5;
        if (!force_split && (est <= cfg_.quad_tol * (b - a) || (b - a) <= 1e-12)) {
          for (std::size_t i = 0; i < nn; ++i) acc[i].add(g16[i]);
        } else {
          const double mid = 0.5 * (a + b);
          stack.emplace_back(mid, b);
          stack.emplace_back(a, mid);
        }
      }
    }

    GramResult out;
    out.n = n;
    out.matrix.resize(nn);
    for (std::size_t i = 0; i < nn; ++i) out.matrix[i] = acc[i].value();
    for (int i = 0; i < n; ++i) out.diag.push_back(out.matrix[static_cast<std::size_t>(i) * n + i]);
    for (int i = 0; i < n; ++i) {
      if (!(out.diag[static_cast<std::size_t>(i)] > 0.0))
        throw precision_error("gram_matrix: non-positive diagonal entry");
      for (int j = i + 1; j < n; ++j) {
        double norm = std::abs(out.matrix[static_cast<std::size_t>(i) * n + j]) /
                      std::sqrt(out.diag[static_cast<std::size_t>(i)] *
                                out.diag[static_cast<std::size_t>(j)]);
        out.max_offdiag_normalized = std::max(out.max_offdiag_normalized, norm);
      }
    }
    return out;
  }

  const ProliferationSpec& spec() const { return spec_; }

 private:
  struct Window {
    double step = 0.25;
    std::vector<double> t;  // fine grid, strictly increasing
    std::vector<double> j;  // cumulative J at the grid points
  };

  void check_p(int p) const {
    if (p < 1 || p > max_p_)
      throw parameter_error("proliferation: tower depth " + std::to_string(p) +
                            " not available (max " + std::to_string(max_p_) + ")");
  }
  static void check_t(double t) {
    if (!(std::isfinite(t) && std::abs(t) <= 1.0 + 1e-12))
      throw domain_error("proliferation: requires t in [-1, 1]");
  }

  // The fine grid is anchored exactly at the tower level: the window J then
  // agrees bit-for-bit with the table J at T^level, which is where the
  // endpoint identities are most sensitive (amplified by the local slope).
  void build_window(int level) {
    const double anchor = tower_lo_.levels[static_cast<std::size_t>(level)];
    const double hi = tower_hi_.levels[static_cast<std::size_t>(level)] + 0.5;
    Window w;
    const double j_anchor = j_integral(anchor, table_, cfg_.quad_tol, cfg_.quad()).value;
    const double left1 = anchor - w.step;
    const double left2 = anchor - 2.0 * w.step;
    const double j_left1 =
        j_anchor - integrate_zeta_sq(left1, anchor, cfg_.quad_tol, cfg_.quad()).value;
    const double j_left2 =
        j_left1 - integrate_zeta_sq(left2, left1, cfg_.quad_tol, cfg_.quad()).value;
    w.t = {left2, left1, anchor};
    w.j = {j_left2, j_left1, j_anchor};
    while (w.t.back() < hi) {
      const double next = w.t.back() + w.step;
      w.j.push_back(w.j.back() +
                    integrate_zeta_sq(w.t.back(), next, cfg_.quad_tol, cfg_.quad()).value);
      w.t.push_back(next);
    }
    windows_[static_cast<std::size_t>(level)] = std::move(w);
  }

  double j_window(int level, double v) const {
    const Window& w = windows_[static_cast<std::size_t>(level)];
    auto it = std::upper_bound(w.t.begin(), w.t.end(), v);
    std::size_t idx = it == w.t.begin() ? 0 : static_cast<std::size_t>(it - w.t.begin()) - 1;
    if (v <= w.t[idx]) return w.j[idx];
    return w.j[idx] + integrate_zeta_sq(w.t[idx], v, cfg_.quad_tol, cfg_.quad()).value;
  }

  // One ladder application for v inside the level window; lands near the
  // level-1 window. Bracket margins absorb the worst-case local slope.
  double ladder_step(int level, double v) const {
    const double target = j_window(level, v);
    const double lo = tower_lo_.levels[static_cast<std::size_t>(level - 1)] - 5.0;
    const double hi = tower_hi_.levels[static_cast<std::size_t>(level - 1)] + 5.0;
    return detail::solve_ladder_lhs(target, lo, hi, cfg_);
  }

  // Shared chain evaluation. On return: *w_out is the argument of P_n,
  // *prod_out the product of |Z~| factors, *signs a per-factor bitmask of
  // sign(Z) used for kink detection. Each ladder step's solution doubles as
  // the next level's argument, so every factor costs one window lookup.
  void eval_chain(double t, double* w_out, double* prod_out, std::uint64_t* signs) const {
    double w = t;
    double prod = 1.0;
    std::uint64_t mask = 0;
    int bit = 0;
    for (std::size_t gi = spec_.generations.size(); gi-- > 0;) {
      const int p = spec_.generations[gi];
      double v = window_affine(p, std::clamp(w, -1.0, 1.0));
      for (int r = 0; r < p; ++r) {
        const double z = hardy_z(v);
        const double phi = ladder_step(p - r, v);
        prod *= std::sqrt(z * z / ladder_lhs_derivative(phi, cfg_));
        if (z < 0.0 && bit < 64) mask |= (1ull << bit);
        ++bit;
        v = phi;
      }
      w = v - spec_.base_T - 1.0;
    }
    *w_out = std::clamp(w, -1.0, 1.0);
    *prod_out = prod;
    *signs = mask;
  }

  // Quadrature moments of f_n f_m over [a, b] for all (n, m) at once.
  // `kink` is set when some |Z~| factor changes the sign of Z across nodes.
  void panel_moments(double a, double b, const double* xs, const double* ws, int half,
                     std::vector<double>& out, std::vector<double>& f, bool* kink) const {
    const int n = spec_.N;
    const std::size_t nn = static_cast<std::size_t>(n) * n;
    std::fill(out.begin(), out.end(), 0.0);
    const double mid = 0.5 * (a + b), hw = 0.5 * (b - a);
    std::uint64_t first_mask = 0;
    bool mask_differs = false;
    for (int i = 0; i < 2 * half; ++i) {
      const double node = (i < half) ? mid - hw * xs[i] : mid + hw * xs[i - half];
      const double weight = ws[i < half ? i : i - half];
      double w = 0.0, prod = 1.0;
      std::uint64_t mask = 0;
      eval_chain(node, &w, &prod, &mask);
      if (i == 0)
        first_mask = mask;
      else if (mask != first_mask)
        mask_differs = true;
      f[0] = 1.0;
      if (n > 1) f[1] = w;
      for (int k = 2; k < n; ++k)
        f[static_cast<std::size_t>(k)] =
            ((2.0 * k - 1.0) * w * f[static_cast<std::size_t>(k - 1)] -
             (k - 1.0) * f[static_cast<std::size_t>(k - 2)]) /
            k;
      for (int r = 0; r < n; ++r) {
        const double fr = f[static_cast<std::size_t>(r)] * prod;
        for (int c = r; c < n; ++c)
          out[static_cast<std::size_t>(r) * n + c] += weight * fr * f[static_cast<std::size_t>(c)] * prod;
      }
    }
    for (std::size_t i = 0; i < nn; ++i) out[i] *= hw;
    for (int r = 0; r < n; ++r)
      for (int c = 0; c < r; ++c)
        out[static_cast<std::size_t>(r) * n + c] = out[static_cast<std::size_t>(c) * n + r];
    if (kink) *kink = mask_differs;
  }

  // Base panel width: 1/20 of the Z-zero spacing mapped back through the
  // widest window chain.
  double panel_cap() const {
    double cap = 0.25;
    const double zero_gap =
        2.0 * M_PI / std::log(tower_hi_.levels[static_cast<std::size_t>(max_p_)] / (2.0 * M_PI));
    for (int p : spec_.generations) {
      const double half_width = 0.5 * (tower_hi_.levels[static_cast<std::size_t>(p)] -
                                       tower_lo_.levels[static_cast<std::size_t>(p)]);
      cap = std::min(cap, zero_gap / half_width / 20.0);
    }
    return cap;
  }

  ProliferationSpec spec_;
  LadderConfig cfg_;
  CheckpointTable& table_;
  int max_p_ = 1;
  ReverseTower tower_lo_, tower_hi_;
  std::vector<Window> windows_;
};

// Spec-shaped free functions; each builds an engine for the call.

inline double u_map(int p, double T, double t, CheckpointTable& table, const LadderConfig& cfg) {
  ProliferationSpec spec;
  spec.base_T = T;
  spec.generations = {p};
  spec.N = 1;
  return ProliferationEngine(spec, table, cfg).u_map(p, t);
}

inline double v_map(int p, int r, double T, double t, CheckpointTable& table,
                    const LadderConfig& cfg) {
  ProliferationSpec spec;
  spec.base_T = T;
  spec.generations = {p};
  spec.N = 1;
  return ProliferationEngine(spec, table, cfg).v_map(p, r, t);
}

inline double proliferate(int n, const ProliferationSpec& spec, double t, CheckpointTable& table,
                          const LadderConfig& cfg) {
  return ProliferationEngine(spec, table, cfg).proliferate(n, t);
}

inline GramResult gram_matrix(const ProliferationSpec& spec, CheckpointTable& table,
                              const LadderConfig& cfg) {
  return ProliferationEngine(spec, table, cfg).gram_matrix();
}

}  // namespace ladderlab
