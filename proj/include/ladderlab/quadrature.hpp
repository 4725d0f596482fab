#pragma once

// Adaptive Gauss-Legendre quadrature for the critical-line second moment,
// plus the persistent checkpoint table that makes large heights a one-time
// cost.
//
// Determinism contract: for fixed inputs the returned values are
// bit-identical across runs and across thread counts. Panels are laid out by
// a pure function of (a, b); each initial panel refines independently
// (leftmost-first); the final reduction always runs in ascending panel
// order with compensated summation. J(T) is canonical: it is always
// assembled from grid-aligned chunks plus one fresh partial, so its value
// never depends on what else the checkpoint store happens to contain.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <functional>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <string>
#include <thread>
#include <vector>

#include "ladderlab/constants.hpp"
#include "ladderlab/detail/numeric.hpp"
#include "ladderlab/errors.hpp"
#include "ladderlab/special_functions.hpp"

namespace ladderlab {

struct IntegralResult {
  double value = 0.0;
  double err_bound = 0.0;
  long long panels = 0;
};

struct QuadratureControl {
  double tol = 1e-8;  // err_bound <= tol * max(1, b - a)
  int threads = 1;
  long long panel_budget = 100'000'000;  // integrand evaluations
};

namespace detail {

// Positive-half Gauss-Legendre nodes/weights on [-1, 1].
inline constexpr double kGl16X[8] = {
    0.989400934991649933, 0.944575023073232576, 0.865631202387831744, 0.755404408355003034,
    0.617876244402643748, 0.458016777657227386, 0.281603550779258913, 0.0950125098376374402};
inline constexpr double kGl16W[8] = {
    0.0271524594117540949, 0.0622535239386478929, 0.0951585116824927848, 0.124628971255533872,
    0.149595988816576732,  0.169156519395002538,  0.182603415044923589,  0.189450610455068496};
inline constexpr double kGl8X[4] = {0.960289856497536232, 0.79666647741362674,
                                    0.525532409916328986, 0.183434642495649805};
inline constexpr double kGl8W[4] = {0.101228536290376259, 0.222381034453374471,
                                    0.313706645877887287, 0.362683783378361983};

// One refinement worker: processes a single initial panel with an explicit
// stack, leftmost interval first, so the acceptance order is ascending.
template <class F>
struct PanelRefiner {
  const F& f;
  double tol_per_unit;  // err target per unit of width
  std::atomic<long long>& evals;
  long long budget;

  struct Piece {
    double a, b;
    int depth;
  };

  void run(double a, double b, NeumaierSum& value, NeumaierSum& err, long long& panels) const {
    std::vector<Piece> stack;
    stack.push_back({a, b, 0});
    while (!stack.empty()) {
      Piece p = stack.back();
      stack.pop_back();
      if (evals.fetch_add(24, std::memory_order_relaxed) + 24 > budget)
        throw precision_error("quadrature: evaluation budget exhausted");
      const double mid = 0.5 * (p.a + p.b);
      const double half = 0.5 * (p.b - p.a);
      double f16[16];
      double v16 = 0.0, v8 = 0.0;
      for (int i = 0; i < 8; ++i) {
        f16[2 * i] = f(mid - half * kGl16X[i]);
        f16[2 * i + 1] = f(mid + half * kGl16X[i]);
        v16 += kGl16W[i] * (f16[2 * i] + f16[2 * i + 1]);
      }
      for (int i = 0; i < 4; ++i) v8 += kGl8W[i] * (f(mid - half * kGl8X[i]) + f(mid + half * kGl8X[i]));
      v16 *= half;
      v8 *= half;
      const double est = std::abs(v16 - v8);
      if (est <= tol_per_unit * (p.b - p.a) || p.depth >= 48) {
        value.add(v16);
        err.add(est);
        ++panels;
      } else {
        stack.push_back({mid, p.b, p.depth + 1});
        stack.push_back({p.a, mid, p.depth + 1});
      }
    }
  }
};

// Generic adaptive driver over an initial panel decomposition given by the
// width-cap function.
template <class F, class Cap>
inline IntegralResult adaptive_integrate(const F& f, double a, double b, const Cap& cap,
                                         const QuadratureControl& ctl) {
  if (!(std::isfinite(a) && std::isfinite(b))) throw domain_error("integrate: non-finite bounds");
  if (!(b >= a)) throw domain_error("integrate: requires a <= b");
  if (!(ctl.tol > 0.0) || !std::isfinite(ctl.tol))
    throw parameter_error("integrate: tol must be positive");
  if (a == b) return {};

  std::vector<double> bounds;
  bounds.push_back(a);
  for (double t = a; t < b;) {
    double w0 = cap(t);
    double w = std::min(cap(t + w0), w0);
    t = std::min(t + w, b);
    bounds.push_back(t);
  }
  const std::size_t n = bounds.size() - 1;

  std::atomic<long long> evals{0};
  struct Slot {
    NeumaierSum value, err;
    long long panels = 0;
  };
  std::vector<Slot> slots(n);
  PanelRefiner<F> refiner{f, ctl.tol, evals, ctl.panel_budget};

  const int threads = std::max(1, ctl.threads);
  if (threads == 1 || n < 4) {
    for (std::size_t i = 0; i < n; ++i)
      refiner.run(bounds[i], bounds[i + 1], slots[i].value, slots[i].err, slots[i].panels);
  } else {
    std::vector<std::thread> pool;
    std::vector<std::exception_ptr> errors(threads);
    std::atomic<std::size_t> next{0};
    for (int w = 0; w < threads; ++w) {
      pool.emplace_back([&, w] {
        try {
          for (std::size_t i = next.fetch_add(1); i < n; i = next.fetch_add(1))
            refiner.run(bounds[i], bounds[i + 1], slots[i].value, slots[i].err, slots[i].panels);
        } catch (...) {
          errors[w] = std::current_exception();
        }
      });
    }
    for (auto& th : pool) th.join();
    for (auto& e : errors)
      if (e) std::rethrow_exception(e);
  }

  NeumaierSum value, err;
  IntegralResult out;
  for (std::size_t i = 0; i < n; ++i) {
    value.add(slots[i].value.value());
    err.add(slots[i].err.value());
    out.panels += slots[i].panels;
  }
  out.value = value.value();
  out.err_bound = err.value();
  if (out.err_bound > ctl.tol * std::max(1.0, b - a))
    throw precision_error("quadrature: could not reach requested tolerance");
  return out;
}

// Panel-width cap for the zeta integrand: never wider than half the local
// mean zero gap 2*pi/ln(t/2pi), and never wider than 2 near the origin.
inline double zeta_panel_cap(double t) {
  if (t <= 10.0) return 2.0;
  return std::min(2.0, M_PI / std::log(t / (2.0 * M_PI)));
}

}  // namespace detail

/// Integral of |zeta(1/2+it)|^2 over [a, b] by adaptive Gauss-Legendre
/// panels with an embedded order-16 vs order-8 error estimate.
inline IntegralResult integrate_zeta_sq(double a, double b, double tol,
                                        const QuadratureControl& ctl = {}) {
  if (!(a >= 0.0)) throw domain_error("integrate_zeta_sq: requires 0 <= a <= b");
  QuadratureControl c = ctl;
  c.tol = tol;
  return detail::adaptive_integrate([](double t) { return zeta_sq_modulus(t); }, a, b,
                                    detail::zeta_panel_cap, c);
}

// ---------------------------------------------------------------------------
// Checkpoint table

inline constexpr double kCheckpointSpacing = 1000.0;

/// Persisted monotone grid of (t, J(t), error bound) values. Rows are
/// append-only; many readers, one writer, extension serialized.
class CheckpointTable {
 public:
  struct Row {
    double t = 0.0;
    double j = 0.0;
    double err = 0.0;
  };

  explicit CheckpointTable(double source_tol = 1e-8) : source_tol_(source_tol) {
    if (!(source_tol > 0.0)) throw parameter_error("CheckpointTable: source_tol must be positive");
  }

  CheckpointTable(CheckpointTable&& other) noexcept {
    std::unique_lock lock(other.rows_mutex_);
    rows_ = std::move(other.rows_);
    source_tol_ = other.source_tol_;
  }
  CheckpointTable& operator=(CheckpointTable&& other) noexcept {
    if (this != &other) {
      std::scoped_lock lock(rows_mutex_, other.rows_mutex_);
      rows_ = std::move(other.rows_);
      source_tol_ = other.source_tol_;
    }
    return *this;
  }

  double source_tol() const { return source_tol_; }

  std::vector<Row> snapshot() const {
    std::shared_lock lock(rows_mutex_);
    return rows_;
  }

  std::size_t size() const {
    std::shared_lock lock(rows_mutex_);
    return rows_.size();
  }

  std::optional<Row> exact(double t) const {
    std::shared_lock lock(rows_mutex_);
    auto it = std::lower_bound(rows_.begin(), rows_.end(), t,
                               [](const Row& r, double v) { return r.t < v; });
    if (it != rows_.end() && it->t == t) return *it;
    return std::nullopt;
  }

  // Largest grid-aligned row with row.t <= t. Only grid rows may serve as
  // accumulation bases; that is what keeps J(T) canonical.
  std::optional<Row> grid_base(double t) const {
    std::shared_lock lock(rows_mutex_);
    auto it = std::upper_bound(rows_.begin(), rows_.end(), t,
                               [](double v, const Row& r) { return v < r.t; });
    while (it != rows_.begin()) {
      --it;
      if (is_grid(it->t)) return *it;
    }
    return std::nullopt;
  }

  double max_t() const {
    std::shared_lock lock(rows_mutex_);
    return rows_.empty() ? 0.0 : rows_.back().t;
  }

  // Appends if t lies beyond the last row; silently skips otherwise (the
  // value is reproducible from grid rows regardless). err is clamped up to
  // stay monotone; any value above a valid bound is still a valid bound.
  void append(Row r) {
    std::unique_lock lock(rows_mutex_);
    if (!rows_.empty()) {
      const Row& last = rows_.back();
      if (!(r.t > last.t)) return;
      if (r.j < last.j)
        throw validation_error("CheckpointTable: j would decrease at t = " + std::to_string(r.t));
      r.err = std::max(r.err, last.err);
    }
    rows_.push_back(r);
  }

  static bool is_grid(double t) {
    return t > 0.0 && t == kCheckpointSpacing * std::floor(t / kCheckpointSpacing);
  }

  // Serializes extensions (first builds of new height ranges).
  std::mutex& extension_mutex() const { return extension_mutex_; }

  // Full structural validation; used on load. Throws validation_error naming
  // the first offending row.
  static void validate_rows(const std::vector<Row>& rows) {
    for (std::size_t i = 0; i < rows.size(); ++i) {
      const Row& r = rows[i];
      if (!std::isfinite(r.t) || !std::isfinite(r.j) || !std::isfinite(r.err))
        throw validation_error("checkpoint row " + std::to_string(i) + ": non-finite value");
      if (r.err < 0.0)
        throw validation_error("checkpoint row " + std::to_string(i) + ": negative error bound");
      if (r.t <= 0.0)
        throw validation_error("checkpoint row " + std::to_string(i) + ": t must be positive");
      if (i > 0) {
        if (!(r.t > rows[i - 1].t))
          throw validation_error("checkpoint row " + std::to_string(i) + ": t not increasing");
        if (r.j < rows[i - 1].j)
          throw validation_error("checkpoint row " + std::to_string(i) + ": j decreasing");
        if (r.err < rows[i - 1].err)
          throw validation_error("checkpoint row " + std::to_string(i) + ": err decreasing");
      }
    }
  }

  void replace_rows(std::vector<Row> rows) {
    validate_rows(rows);
    std::unique_lock lock(rows_mutex_);
    rows_ = std::move(rows);
  }

 private:
  std::vector<Row> rows_;
  double source_tol_;
  mutable std::shared_mutex rows_mutex_;
  mutable std::mutex extension_mutex_;
};

/// Writes the table as CSV (`t,j,err`, 17 significant digits) atomically.
inline void save_checkpoints(const CheckpointTable& table, const std::filesystem::path& path) {
  const std::vector<CheckpointTable::Row> rows = table.snapshot();
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::trunc);
    if (!out) throw io_error("save_checkpoints: cannot open " + tmp.string());
    out << "t,j,err\n";
    char line[128];
    for (const auto& r : rows) {
      std::snprintf(line, sizeof(line), "%.17g,%.17g,%.17g\n", r.t, r.j, r.err);
      out << line;
    }
    out.flush();
    if (!out) throw io_error("save_checkpoints: write failed for " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw io_error("save_checkpoints: rename failed: " + ec.message());
}

/// Loads and validates a checkpoint CSV. An empty file yields an empty,
/// valid table. `source_tol` must match the tolerance the store was built
/// with (the file format carries values only).
inline CheckpointTable load_checkpoints(const std::filesystem::path& path,
                                        double source_tol = 1e-8) {
  std::ifstream in(path);
  if (!in) throw io_error("load_checkpoints: cannot open " + path.string());
  CheckpointTable table(source_tol);
  std::string line;
  if (!std::getline(in, line)) return table;  // empty file
  if (line != "t,j,err")
    throw validation_error("load_checkpoints: bad header '" + line + "' in " + path.string());
  std::vector<CheckpointTable::Row> rows;
  std::size_t index = 0;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    CheckpointTable::Row r;
    char* end = nullptr;
    const char* s = line.c_str();
    r.t = std::strtod(s, &end);
    if (end == s || *end != ',')
      throw validation_error("checkpoint row " + std::to_string(index) + ": unparsable");
    s = end + 1;
    r.j = std::strtod(s, &end);
    if (end == s || *end != ',')
      throw validation_error("checkpoint row " + std::to_string(index) + ": unparsable");
    s = end + 1;
    r.err = std::strtod(s, &end);
    if (end == s)
      throw validation_error("checkpoint row " + std::to_string(index) + ": unparsable");
    rows.push_back(r);
    ++index;
  }
  table.replace_rows(std::move(rows));
  return table;
}

// ---------------------------------------------------------------------------

/// Main term of the classical second-moment formula:
/// T ln T - (1 + ln 2pi - 2c) T.
inline double hli_reference(double T, const Constants& consts = {}) {
  if (!(std::isfinite(T) && T > 0.0)) throw domain_error("hli_reference: requires T > 0");
  return T * std::log(T) - (1.0 + consts.ln_two_pi - 2.0 * consts.euler_c) * T;
}

/// J(T) = integral of |zeta(1/2+it)|^2 over [0, T], assembled from
/// grid-aligned cached chunks plus one fresh partial. Extends the table in
/// increments of at most kCheckpointSpacing.
inline IntegralResult j_integral(double T, CheckpointTable& table, double tol,
                                 const QuadratureControl& ctl = {}) {
  if (!(std::isfinite(T) && T >= 0.0)) throw domain_error("j_integral: requires T >= 0");
  if (!(tol > 0.0)) throw parameter_error("j_integral: tol must be positive");
  if (T == 0.0) return {};

  QuadratureControl chunk_ctl = ctl;
  chunk_ctl.tol = table.source_tol();

  // A query tighter than the store's resolution bypasses the cache.
  if (tol < table.source_tol()) {
    QuadratureControl fresh = ctl;
    fresh.tol = tol;
    return integrate_zeta_sq(0.0, T, tol, fresh);
  }

  if (auto hit = table.exact(T); hit && hit->err <= tol * std::max(1.0, T))
    return {hit->j, hit->err, 0};

  std::scoped_lock extension(table.extension_mutex());
  if (auto hit = table.exact(T); hit && hit->err <= tol * std::max(1.0, T))
    return {hit->j, hit->err, 0};

  // Walk the grid chunks up to the last grid point below T, reusing rows
  // where present and computing (and appending) the missing ones.
  const double grid_top = kCheckpointSpacing * std::floor(T / kCheckpointSpacing);
  CheckpointTable::Row base{0.0, 0.0, 0.0};
  if (auto b = table.grid_base(T)) base = *b;
  long long new_panels = 0;
  while (base.t < grid_top) {
    const double next = base.t + kCheckpointSpacing;
    if (auto row = table.exact(next)) {
      base = *row;
      continue;
    }
    IntegralResult chunk = integrate_zeta_sq(base.t, next, chunk_ctl.tol, chunk_ctl);
    base = {next, base.j + chunk.value, base.err + chunk.err_bound};
    new_panels += chunk.panels;
    table.append(base);
  }

  IntegralResult out{base.j, base.err, new_panels};
  if (T > base.t) {
    IntegralResult part = integrate_zeta_sq(base.t, T, chunk_ctl.tol, chunk_ctl);
    out.value += part.value;
    out.err_bound += part.err_bound;
    out.panels += part.panels;
    table.append({T, out.value, out.err_bound});
  }
  return out;
}

}  // namespace ladderlab
