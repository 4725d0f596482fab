#pragma once

// Scalar kernels for the critical line: Riemann-Siegel theta, the Hardy
// Z-function, log-gamma and exact prime counting. Everything here is a pure
// function of its arguments; lookup tables are built once under a
// single-initialization guard.

#include <array>
#include <cmath>
#include <complex>
#include <cstdint>
#include <vector>

#include "ladderlab/constants.hpp"
#include "ladderlab/detail/numeric.hpp"
#include "ladderlab/errors.hpp"

namespace ladderlab {

namespace detail {

inline constexpr long double kPiL = 3.14159265358979323846264338327950288L;
inline constexpr long double kTwoPiL = 6.28318530717958647692528676655900577L;
inline constexpr long double kLnSqrtTwoPiL = 0.918938533204672741780329736405617639L;

// Crossover between the Euler-Maclaurin continuation and the Riemann-Siegel
// formula. Below ~2.5e3 the 5-term Riemann-Siegel remainder is no better
// than ~1e-11 absolute; Euler-Maclaurin is machine-accurate there and its
// cost only grows linearly in t.
inline constexpr double kRsCrossover = 2500.0;

// log(n) split into hi/lo doubles plus n^{-1/2}, for phase-accurate
// evaluation of the main sums. Sized for heights up to 2*pi*4096^2 ~ 1e8.
struct LogTable {
  static constexpr int kMaxN = 4097;
  std::vector<double> ln_hi, ln_lo, rsqrt;

  LogTable() : ln_hi(kMaxN), ln_lo(kMaxN), rsqrt(kMaxN) {
    for (int n = 1; n < kMaxN; ++n) {
      long double l = std::log(static_cast<long double>(n));
      double hi = static_cast<double>(l);
      ln_hi[n] = hi;
      ln_lo[n] = static_cast<double>(l - hi);
      rsqrt[n] = static_cast<double>(1.0L / std::sqrt(static_cast<long double>(n)));
    }
  }

  static const LogTable& get() {
    static const LogTable table;
    return table;
  }
};

// B_{2k}/(2k)!, k = 1..12 (Euler-Maclaurin tail).
inline constexpr std::array<double, 12> kBernoulliOverFactorial = {
    0.0833333333333333333,   -0.00138888888888888889, 0.0000330687830687830688,
    -8.2671957671957672e-7,  2.0876756987868099e-8,   -5.28419013868749318e-10,
    1.33825365306846788e-11, -3.38968029632258287e-13, 8.58606205627784456e-15,
    -2.17486869855806187e-16, 5.50900282836022952e-18, -1.39544646858125233e-19};

// B_{2k}/((2k)(2k-1)), k = 1..8 (Stirling series).
inline constexpr std::array<long double, 8> kStirling = {
    0.0833333333333333333L,  -0.00277777777777777778L, 0.000793650793650793651L,
    -0.000595238095238095238L, 0.000841750841750841751L, -0.00191752691752691753L,
    0.00641025641025641026L, -0.0295506535947712418L};

// Taylor coefficients of the Riemann-Siegel correction terms C0..C4 in
// z = 2p - 1 (Haselgrove's tables; C0, C2, C4 are even series, C1, C3 odd).
// Verified end to end against a high-precision main-sum evaluation: the
// truncated remainder is below 6e-12 for t >= 2.5e3.
inline constexpr double kRsC0[] = {
    .38268343236508977173, .43724046807752044936, .13237657548034352332,
    -.01360502604767418865, -.01356762197010358089, -.00162372532314446528,
    .00029705353733379691, .00007943300879521470, .00000046556124614505,
    -.00000143272516309551, -.00000010354847112313, .00000001235792708386,
    .00000000178810838580, -.00000000003391414390, -.00000000001632663390,
    -.00000000000037851093, .00000000000009327423, .00000000000000522184,
    -.00000000000000033507, -.00000000000000003412, .00000000000000000058,
    .00000000000000000015};
inline constexpr double kRsC1[] = {
    -.02682510262837534703, .01378477342635185305, .03849125048223508223,
    .00987106629906207647, -.00331075976085840433, -.00146478085779541508,
    -.00001320794062487696, .00005922748701847141, .00000598024258537345,
    -.00000096413224561698, -.00000018334733722714, .00000000446708756272,
    .00000000270963508218, .00000000007785288654, -.00000000002343762601,
    -.00000000000158301728, .00000000000012119942, .00000000000001458378,
    -.00000000000000028786, -.00000000000000008663, -.00000000000000000084,
    .00000000000000000036, .00000000000000000001};
inline constexpr double kRsC2[] = {
    .00518854283029316849, .00030946583880634746, -.01133594107822937338,
    .00223304574195814477, .00519663740886233021, .00034399144076208337,
    -.00059106484274705828, -.00010229972547935857, .00002088839221699276,
    .00000592766549309654, -.00000016423838362436, -.00000015161199700941,
    -.00000000590780369821, .00000000209115148595, .00000000017815649583,
    -.00000000001616407246, -.00000000000238069625, .00000000000005398265,
    .00000000000001975014, .00000000000000023333, -.00000000000000011188,
    -.00000000000000000416, .00000000000000000044, .00000000000000000003};
inline constexpr double kRsC3[] = {
    -.00133971609071945690, .00374421513637939370, -.00133031789193214681,
    -.00226546607654717871, .00095484999985067304, .00060100384589636039,
    -.00010128858286776622, -.00006865733449299826, .00000059853667915386,
    .00000333165985123995, .00000021919289102435, -.00000007890884245681,
    -.00000000941468508130, .00000000095701162109, .00000000018763137453,
    -.00000000000443783768, -.00000000000224267385, -.00000000000003627687,
    .00000000000001763981, .00000000000000079608, -.00000000000000009420,
    -.00000000000000000713, .00000000000000000033, .00000000000000000004};
inline constexpr double kRsC4[] = {
    .00046483389361763382, -.00100566073653404708, .00024044856573725793,
    .00102830861497023219, -.00076578610717556442, -.00020365286803084818,
    .00023212290491068728, .00003260214424386520, -.00002557906251794953,
    -.00000410746443891574, .00000117811136403713, .00000024456561422485,
    -.00000002391582476734, -.00000000750521420704, .00000000013312279416,
    .00000000013440626754, .00000000000351377004, -.00000000000151915445,
    -.00000000000008915418, .00000000000001119589, .00000000000000105160,
    -.00000000000000000677, -.00000000000000000878, -.00000000000000000010,
    .00000000000000000006};

template <std::size_t N>
inline double poly_in_z2(const double (&c)[N], double z2) {
  double acc = 0.0;
  for (std::size_t i = N; i-- > 0;) acc = acc * z2 + c[i];
  return acc;
}

// theta via the asymptotic expansion; valid (to well below 1e-10) for
// t >= 10.
inline long double theta_asymptotic(long double t) {
  long double lt = std::log(t / kTwoPiL);
  long double inv = 1.0L / t;
  long double inv2 = inv * inv;
  long double tail = inv * (1.0L / 48.0L +
                            inv2 * (7.0L / 5760.0L +
                                    inv2 * (31.0L / 80640.0L + inv2 * (127.0L / 430080.0L))));
  return 0.5L * t * (lt - 1.0L) - kPiL / 8.0L + tail;
}

// lnGamma(z) for complex z with Re z > 0: Stirling series after shifting the
// argument so |z + shift| is comfortably large.
inline std::complex<long double> log_gamma_complex(std::complex<long double> z) {
  constexpr int kShift = 12;
  std::complex<long double> acc = 0.0L;
  for (int m = 0; m < kShift; ++m) acc -= std::log(z + static_cast<long double>(m));
  std::complex<long double> w = z + static_cast<long double>(kShift);
  std::complex<long double> iw = 1.0L / w;
  std::complex<long double> iw2 = iw * iw;
  std::complex<long double> series = 0.0L;
  std::complex<long double> p = iw;
  for (std::size_t k = 0; k < kStirling.size(); ++k) {
    series += kStirling[k] * p;
    p *= iw2;
  }
  acc += (w - 0.5L) * std::log(w) - w + kLnSqrtTwoPiL + series;
  return acc;
}

// theta(t) = Im lnGamma(1/4 + it/2) - (t/2) ln(pi); exact route used below
// t = 10 where the asymptotic series is not trustworthy.
inline long double theta_exact(long double t) {
  std::complex<long double> z(0.25L, 0.5L * t);
  return std::imag(log_gamma_complex(z)) - 0.5L * t * std::log(kPiL);
}

inline long double theta_internal(double t) {
  return t < 10.0 ? theta_exact(t) : theta_asymptotic(t);
}

// zeta(1/2 + it) by Euler-Maclaurin continuation. The cutoff N ~ 0.8 t keeps
// the Bernoulli tail geometric with ratio < 1/25, so 12 terms reach machine
// precision for every t below the Riemann-Siegel crossover.
inline std::complex<double> zeta_half_euler_maclaurin(double t) {
  const LogTable& tab = LogTable::get();
  const int n_cut = std::max(24, static_cast<int>(std::ceil(0.8 * t)));
  const std::complex<double> s(0.5, t);

  NeumaierSum re, im;
  for (int n = 1; n < n_cut; ++n) {
    double hi, lo;
    dd_mul(t, tab.ln_hi[n], tab.ln_lo[n], hi, lo);
    double phase = reduce_two_pi(hi, lo);
    re.add(tab.rsqrt[n] * std::cos(phase));
    im.add(-tab.rsqrt[n] * std::sin(phase));
  }
  std::complex<double> sum(re.value(), im.value());

  double hi, lo;
  dd_mul(t, tab.ln_hi[n_cut], tab.ln_lo[n_cut], hi, lo);
  double phase = reduce_two_pi(hi, lo);
  const std::complex<double> n_pow_minus_s =
      tab.rsqrt[n_cut] * std::complex<double>(std::cos(phase), -std::sin(phase));
  const double n_real = static_cast<double>(n_cut);

  sum += n_real * n_pow_minus_s / (s - 1.0);  // N^{1-s}/(s-1)
  sum += 0.5 * n_pow_minus_s;

  std::complex<double> poch = s;  // s(s+1)...(s+2k-2)
  std::complex<double> scale = n_pow_minus_s / n_real;
  const double inv_n2 = 1.0 / (n_real * n_real);
  for (std::size_t k = 0; k < kBernoulliOverFactorial.size(); ++k) {
    sum += kBernoulliOverFactorial[k] * poch * scale;
    double base = 2.0 * static_cast<double>(k);
    poch *= (s + (base + 1.0)) * (s + (base + 2.0));
    scale *= inv_n2;
  }
  return sum;
}

inline double hardy_z_euler_maclaurin(double t) {
  std::complex<double> zeta = zeta_half_euler_maclaurin(t);
  long double theta = theta_internal(t);
  long double k = std::floor(theta / kTwoPiL);
  double phase = static_cast<double>(theta - k * kTwoPiL);
  return std::cos(phase) * zeta.real() - std::sin(phase) * zeta.imag();
}

inline double hardy_z_riemann_siegel(double t) {
  const LogTable& tab = LogTable::get();
  const long double tau_l = std::sqrt(static_cast<long double>(t) / kTwoPiL);
  const int n_terms = static_cast<int>(tau_l);
  if (n_terms + 1 >= LogTable::kMaxN)
    throw precision_error("hardy_z: height beyond supported table range (~1e8)");
  const double p = static_cast<double>(tau_l - n_terms);

  long double theta = theta_asymptotic(t);
  long double k = std::floor(theta / kTwoPiL);
  long double theta_red = theta - k * kTwoPiL;
  const double th_hi = static_cast<double>(theta_red);
  const double th_lo = static_cast<double>(theta_red - th_hi);

  NeumaierSum main;
  for (int n = 1; n <= n_terms; ++n) {
    double hi, lo;
    dd_mul(t, tab.ln_hi[n], tab.ln_lo[n], hi, lo);
    double reduced = reduce_two_pi(hi - th_hi, lo - th_lo);
    main.add(tab.rsqrt[n] * std::cos(reduced));
  }

  const double z = 2.0 * p - 1.0;
  const double z2 = z * z;
  const double x = static_cast<double>(1.0L / tau_l);  // (2pi/t)^{1/2}
  double corr = poly_in_z2(kRsC0, z2);
  corr += z * poly_in_z2(kRsC1, z2) * x;
  corr += poly_in_z2(kRsC2, z2) * (x * x);
  corr += z * poly_in_z2(kRsC3, z2) * (x * x * x);
  corr += poly_in_z2(kRsC4, z2) * (x * x * x * x);
  const double sign = (n_terms % 2 == 0) ? -1.0 : 1.0;
  return 2.0 * main.value() + sign * std::sqrt(x) * corr;
}

}  // namespace detail

// ---------------------------------------------------------------------------

/// Riemann-Siegel theta. Asymptotic expansion for t >= 10, exact log-gamma
/// evaluation below.
inline double riemann_siegel_theta(double t) {
  if (!(std::isfinite(t) && t >= 1.0))
    throw domain_error("riemann_siegel_theta: requires t >= 1");
  return static_cast<double>(detail::theta_internal(t));
}

/// Hardy's Z-function: the real-valued rotation of zeta(1/2 + it) with
/// |Z(t)| = |zeta(1/2 + it)|.
inline double hardy_z(double t) {
  if (!(std::isfinite(t) && t >= 0.0)) throw domain_error("hardy_z: requires t >= 0");
  if (t < detail::kRsCrossover) return detail::hardy_z_euler_maclaurin(t);
  return detail::hardy_z_riemann_siegel(t);
}

/// |zeta(1/2 + it)|^2, the integrand of the critical-line second moment.
inline double zeta_sq_modulus(double t) {
  double z = hardy_z(t);
  return z * z;
}

/// Natural log of the Gamma function on the positive reals. Lanczos for
/// moderate arguments, Stirling series beyond.
inline double ln_gamma(double x) {
  if (!(std::isfinite(x) && x > 0.0)) throw domain_error("ln_gamma: requires x > 0");
  if (x < 16.0) {
    // Lanczos, g = 7, 9 coefficients; ~2e-15 absolute over this range.
    static constexpr long double kLanczos[] = {
        0.99999999999980993L,   676.5203681218851L,     -1259.1392167224028L,
        771.32342877765313L,    -176.61502916214059L,   12.507343278686905L,
        -0.13857109526572012L,  9.9843695780195716e-6L, 1.5056327351493116e-7L};
    long double xl = x;
    long double acc = kLanczos[0];
    for (int i = 1; i < 9; ++i) acc += kLanczos[i] / (xl - 1.0L + i);
    long double w = xl + 6.5L;  // x + g - 1/2
    return static_cast<double>(detail::kLnSqrtTwoPiL + (xl - 0.5L) * std::log(w) - w +
                               std::log(acc));
  }
  long double xl = x;
  long double inv = 1.0L / xl;
  long double inv2 = inv * inv;
  long double series = 0.0L;
  long double p = inv;
  for (std::size_t k = 0; k < detail::kStirling.size(); ++k) {
    series += detail::kStirling[k] * p;
    p *= inv2;
  }
  return static_cast<double>((xl - 0.5L) * std::log(xl) - xl + detail::kLnSqrtTwoPiL + series);
}

/// Exact count of primes <= x by a segmented sieve. Exact mode is capped at
/// 1e8; larger heights should use the T/ln T asymptotic quoted in reports.
inline std::int64_t prime_count(double x) {
  if (!(std::isfinite(x) && x >= 2.0)) throw domain_error("prime_count: requires 2 <= x");
  if (x > 1e8)
    throw domain_error(
        "prime_count: exact mode is capped at 1e8; use the T/ln T asymptotic "
        "for larger heights");
  const std::uint64_t limit = static_cast<std::uint64_t>(x);

  // Root primes up to 1e4, built once.
  static const std::vector<std::uint32_t> root_primes = [] {
    constexpr std::uint32_t root = 10000;
    std::vector<bool> composite(root + 1, false);
    std::vector<std::uint32_t> primes;
    for (std::uint32_t i = 2; i <= root; ++i) {
      if (composite[i]) continue;
      primes.push_back(i);
      for (std::uint64_t j = static_cast<std::uint64_t>(i) * i; j <= root; j += i)
        composite[j] = true;
    }
    return primes;
  }();

  constexpr std::uint64_t kSegment = 1u << 18;
  std::vector<bool> is_composite(kSegment);
  std::int64_t count = 0;
  for (std::uint64_t lo = 2; lo <= limit; lo += kSegment) {
    const std::uint64_t hi = std::min(lo + kSegment - 1, limit);
    std::fill(is_composite.begin(), is_composite.end(), false);
    for (std::uint32_t p : root_primes) {
      const std::uint64_t p64 = p;
      if (p64 * p64 > hi) break;
      std::uint64_t start = std::max(p64 * p64, ((lo + p64 - 1) / p64) * p64);
      for (std::uint64_t j = start; j <= hi; j += p64) is_composite[j - lo] = true;
    }
    for (std::uint64_t v = lo; v <= hi; ++v)
      if (!is_composite[v - lo]) ++count;
  }
  return count;
}

}  // namespace ladderlab
