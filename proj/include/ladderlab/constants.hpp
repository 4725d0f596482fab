#pragma once

#include <cmath>

#include "ladderlab/errors.hpp"

namespace ladderlab {

// Named constants used across every residual and report. Values are pinned to
// 15 significant digits so that reports are reproducible bit-for-bit.
struct Constants {
  double euler_c = 0.577215664901533;  // Euler-Mascheroni constant c
  double ln_two_pi = 1.837877066409345;

  double ln_sqrt_two_pi() const { return ln_two_pi / 2.0; }
  double one_minus_c() const { return 1.0 - euler_c; }

  // ln(2*pi) - 1 - c, the rectangle-term constant of the increment
  // decomposition. Evaluates to about 0.2606614.
  double rectangle_constant() const { return ln_two_pi - 1.0 - euler_c; }

  void validate() const {
    if (!(euler_c > 0.5772156 && euler_c < 0.5772157))
      throw validation_error("Constants: euler_c outside (0.5772156, 0.5772157)");
    if (!(one_minus_c() > 0.42 && one_minus_c() < 0.43))
      throw validation_error("Constants: 1 - euler_c outside (0.42, 0.43)");
  }
};

// A height on the critical line. Mostly a validation helper; the scalar
// kernels accept plain doubles.
struct EvalPoint {
  double t;

  explicit EvalPoint(double height) : t(height) {
    if (!(std::isfinite(t) && t > 0.0))
      throw domain_error("EvalPoint: t must be finite and positive");
  }
};

}  // namespace ladderlab
