#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <limits>

#include "cbi/errors.hpp"

namespace cbi {

// Extended nonnegative real: a finite value or "divergent". Integrals of
// Levy measures legitimately diverge; that is a result, not an error.
struct Moment {
  double value = 0.0;
  bool divergent = false;

  static Moment finite(double v) { return {v, false}; }
  static Moment diverged() { return {std::numeric_limits<double>::infinity(), true}; }

  Moment& operator+=(const Moment& o) {
    divergent = divergent || o.divergent;
    value = divergent ? std::numeric_limits<double>::infinity() : value + o.value;
    return *this;
  }
  Moment operator*(double s) const { return divergent ? diverged() : finite(value * s); }
};

inline Moment operator+(Moment a, const Moment& b) { return a += b; }

// Exact ∫_a^b z^q dz over 0 <= a <= b <= inf, with the improper endpoints
// resolved analytically (finite at 0 iff q > -1, finite at inf iff q < -1).
inline Moment power_integral(double q, double a, double b) {
  if (!(a >= 0.0) || b < a) throw OutOfRange("power_integral: need 0 <= a <= b");
  if (a == b) return Moment::finite(0.0);
  const bool to_inf = std::isinf(b);
  if (q == -1.0) {
    if (a == 0.0 || to_inf) return Moment::diverged();
    return Moment::finite(std::log(b / a));
  }
  const double p = q + 1.0;
  double upper, lower;
  if (to_inf) {
    if (p > 0.0) return Moment::diverged();
    upper = 0.0;
  } else {
    upper = std::pow(b, p);
  }
  if (a == 0.0) {
    if (p < 0.0) return Moment::diverged();
    lower = 0.0;
  } else {
    lower = std::pow(a, p);
  }
  return Moment::finite((upper - lower) / p);
}

namespace quad {

// 15-point Gauss-Legendre panel; exact for polynomials of degree <= 29.
inline double gl15(const auto& f, double a, double b) {
  static constexpr std::array<double, 8> x = {
      0.0000000000000000, 0.2011940939974345, 0.3941513470775634, 0.5709721726085388,
      0.7244177313601701, 0.8482065834104272, 0.9372733924007060, 0.9879925180204854};
  static constexpr std::array<double, 8> w = {
      0.2025782419255613, 0.1984314853271116, 0.1861610000155622, 0.1662692058169939,
      0.1395706779261543, 0.1071592204671719, 0.0703660474881081, 0.0307532419961173};
  const double c = 0.5 * (a + b), h = 0.5 * (b - a);
  double s = w[0] * f(c);
  for (int i = 1; i < 8; ++i) s += w[i] * (f(c - h * x[i]) + f(c + h * x[i]));
  return s * h;
}

namespace detail {

inline double simpson(const auto& f, double a, double fa, double b, double fb, double m, double fm) {
  return (b - a) / 6.0 * (fa + 4.0 * fm + fb);
}

inline double adaptive_rec(const auto& f, double a, double fa, double b, double fb, double m,
                           double fm, double whole, double tol, int depth, long& budget) {
  if (--budget <= 0) throw QuadratureFailure("adaptive_simpson: evaluation budget exhausted");
  const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
  const double flm = f(lm), frm = f(rm);
  const double left = simpson(f, a, fa, m, fm, lm, flm);
  const double right = simpson(f, m, fm, b, fb, rm, frm);
  const double delta = left + right - whole;
  if (depth <= 0) return left + right + delta / 15.0;
  if (std::abs(delta) <= 15.0 * tol) return left + right + delta / 15.0;
  return adaptive_rec(f, a, fa, m, fm, lm, flm, left, 0.5 * tol, depth - 1, budget) +
         adaptive_rec(f, m, fm, b, fb, rm, frm, right, 0.5 * tol, depth - 1, budget);
}

}  // namespace detail

// Adaptive Simpson with Richardson correction. Handles integrable
// discontinuities by homing in on them (depth up to 60).
inline double adaptive_simpson(const auto& f, double a, double b, double abs_tol,
                               int max_depth = 60, long budget = 4'000'000) {
  if (a == b) return 0.0;
  const double m = 0.5 * (a + b);
  const double fa = f(a), fb = f(b), fm = f(m);
  const double whole = detail::simpson(f, a, fa, b, fb, m, fm);
  return detail::adaptive_rec(f, a, fa, b, fb, m, fm, whole, abs_tol, max_depth, budget);
}

// ∫_a^inf f, f eventually of one sign and power-law-or-faster decaying.
// Sums dyadic panels [a 2^k, a 2^{k+1}]; declares divergence when the partial
// sum exceeds 1e6 or the panel sequence stops decaying geometrically.
inline Moment integrate_to_inf(const auto& f, double a, double abs_tol) {
  if (!(a > 0.0)) throw OutOfRange("integrate_to_inf: need a > 0");
  double sum = 0.0;
  double prev = std::numeric_limits<double>::quiet_NaN();
  double lo = a;
  for (int k = 0; k < 200; ++k) {
    const double hi = 2.0 * lo;
    const double panel = adaptive_simpson(f, lo, hi, abs_tol / 64.0);
    sum += panel;
    if (sum > 1e6) return Moment::diverged();
    const double mag = std::abs(panel);
    if (!std::isnan(prev) && prev > 0.0) {
      const double ratio = mag / prev;
      if (ratio < 0.999) {
        // geometric tail estimate
        const double tail = mag * ratio / (1.0 - ratio);
        if (mag < 0.5 * abs_tol && tail < 0.5 * abs_tol) return Moment::finite(sum + tail);
        if (sum + tail > 1e6) return Moment::diverged();
      } else if (k > 8 && mag > abs_tol) {
        return Moment::diverged();
      }
    }
    if (mag == 0.0 && k > 2) return Moment::finite(sum);
    prev = mag;
    lo = hi;
  }
  return Moment::diverged();
}

// ∫_0^b f with the only singularity at the origin. Dyadic halvings from b to
// the first boundary below the hard origin split 1e-8 (every panel full, so
// power-law panels decay geometrically), then a geometric extrapolation of
// the remainder. Divergence: partial sum above 1e6 or a non-decaying ratio.
inline Moment integrate_from_origin(const auto& f, double b, double abs_tol) {
  if (!(b > 0.0)) throw OutOfRange("integrate_from_origin: need b > 0");
  constexpr double kOriginSplit = 1e-8;
  double sum = 0.0;
  double hi = b;
  double prev = std::numeric_limits<double>::quiet_NaN();
  double last_ratio = 0.0;
  while (hi > kOriginSplit * b) {
    const double lo = 0.5 * hi;
    const double panel = adaptive_simpson(f, lo, hi, abs_tol / 64.0);
    sum += panel;
    if (sum > 1e6) return Moment::diverged();
    const double mag = std::abs(panel);
    if (!std::isnan(prev) && prev > 0.0) last_ratio = mag / prev;
    prev = mag;
    hi = lo;
  }
  // remaining mass on (0, hi] from the panel decay ratio
  if (!std::isnan(prev) && prev > 0.0) {
    if (last_ratio >= 0.999) return Moment::diverged();
    const double tail = prev * last_ratio / (1.0 - last_ratio);
    if (sum + tail > 1e6) return Moment::diverged();
    sum += tail;
  }
  return Moment::finite(sum);
}

}  // namespace quad
}  // namespace cbi
