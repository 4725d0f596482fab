#pragma once

#include <cmath>

namespace ladderlab::detail {

// Neumaier-compensated accumulator. Deterministic for a fixed order of
// add() calls, which is what the reproducibility contract needs.
struct NeumaierSum {
  double sum = 0.0;
  double comp = 0.0;

  void add(double v) {
    double t = sum + v;
    if (std::abs(sum) >= std::abs(v))
      comp += (sum - t) + v;
    else
      comp += (v - t) + sum;
    sum = t;
  }
  double value() const { return sum + comp; }
};

// Split of 2*pi used by the argument reduction below. PI2_LO is the
// double-precision residual of 2*pi past PI2_HI.
inline constexpr double kPi2Hi = 6.283185307179586476925286766559;  // rounds to nearest double
inline constexpr double kPi2Lo = 2.4492935982947063545e-16;

// Reduces `hi + lo` modulo 2*pi to roughly 1e-16 absolute accuracy using an
// fma-based exact product for k*2pi. `hi` may be as large as ~1e8.
inline double reduce_two_pi(double hi, double lo) {
  double k = std::nearbyint(hi * (1.0 / kPi2Hi));
  double kp = k * kPi2Hi;
  double kerr = std::fma(k, kPi2Hi, -kp);
  return ((hi - kp) - kerr) + (lo - k * kPi2Lo);
}

// t * ln(n) as a hi/lo pair, with ln(n) supplied as a hi/lo pair.
inline void dd_mul(double t, double ln_hi, double ln_lo, double& hi, double& lo) {
  hi = t * ln_hi;
  lo = std::fma(t, ln_hi, -hi) + t * ln_lo;
}

}  // namespace ladderlab::detail
