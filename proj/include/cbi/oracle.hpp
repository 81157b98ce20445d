#pragma once

#include <cmath>
#include <limits>

#include "cbi/errors.hpp"
#include "cbi/levy.hpp"
#include "cbi/params.hpp"
#include "cbi/quadrature.hpp"

namespace cbi {

// Closed-form Laplace transform of dX = (beta + b X) dt + sqrt(2 c X) dW:
// E[e^{-lambda X(t)} | X(0)=x0].
inline double laplace_cir(double c, double beta, double b, double x0, double t, double lambda) {
  if (!(c > 0.0)) throw OutOfRange("laplace_cir: need c > 0");
  if (!(t > 0.0)) throw OutOfRange("laplace_cir: need t > 0");
  if (lambda < 0.0) throw OutOfRange("laplace_cir: need lambda >= 0");
  if (lambda == 0.0) return 1.0;
  double denom, vt;
  if (b == 0.0) {
    denom = 1.0 + c * lambda * t;
    vt = lambda / denom;
  } else {
    const double e = std::exp(b * t);
    denom = 1.0 + (c * lambda / b) * (e - 1.0);
    vt = lambda * e / denom;
  }
  return std::pow(denom, -beta / c) * std::exp(-x0 * vt);
}

namespace oracle_detail {

// ∫ (e^{-v z} - 1 + v (1 ∧ z)) mu(dz): the jump part of the branching
// mechanism for a one-dimensional measure. Series head at the origin,
// adaptive quadrature elsewhere, exponential-capped tails.
inline double branching_integral(const LevyMeasureSpec& mu, double v) {
  if (v == 0.0) return 0.0;
  constexpr double kTol = 1e-12;
  return std::visit(
      [&](const auto& s) -> double {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, ZeroMeasure>) {
          return 0.0;
        } else if constexpr (std::is_same_v<T, FiniteAtoms>) {
          double acc = 0.0;
          for (const auto& a : s.atoms) {
            const double z = a.z[0];
            acc += a.mass * (std::exp(-v * z) - 1.0 + v * std::min(1.0, z));
          }
          return acc;
        } else if constexpr (std::is_same_v<T, PerCoordinateStable> ||
                             std::is_same_v<T, TruncatedStableCone>) {
          double alpha;
          bool truncated;
          if constexpr (std::is_same_v<T, PerCoordinateStable>) {
            alpha = s.alpha;
            truncated = s.truncated;
          } else {
            alpha = s.alpha;
            truncated = true;
          }
          // series on (0, z0]: e^{-vz} - 1 + vz = sum_{m>=2} (-vz)^m / m!
          const double z0 = std::min(0.25 / v, 1.0);
          double acc = 0.0;
          {
            double fact = 2.0, sign = 1.0;
            for (int m = 2; m <= 12; ++m) {
              acc += sign * std::pow(v, m) * std::pow(z0, m - alpha) / (fact * (m - alpha));
              sign = -sign;
              fact *= m + 1.0;
            }
          }
          if (z0 < 1.0) {
            const auto f = [&](double z) {
              return (std::exp(-v * z) - 1.0 + v * z) * std::pow(z, -1.0 - alpha);
            };
            acc += quad::adaptive_simpson(f, z0, 1.0, kTol);
          }
          if (!truncated) {
            // (1, inf): integrand -> (v - 1) z^{-1-alpha} plus exponential rest
            acc += (v - 1.0) / alpha;
            const double zhi = 1.0 + 50.0 / v;
            const auto g = [&](double z) { return std::exp(-v * z) * std::pow(z, -1.0 - alpha); };
            acc += quad::adaptive_simpson(g, 1.0, zhi, kTol);
          }
          return acc;
        } else if constexpr (std::is_same_v<T, CompoundPoisson>) {
          return s.rate * std::visit(
                              [&](const auto& l) -> double {
                                using L = std::decay_t<decltype(l)>;
                                double lo, hi;
                                if constexpr (std::is_same_v<L, AxisExponential>) {
                                  lo = 0.0;
                                  hi = l.mean * 50.0 + 50.0;
                                } else {
                                  lo = l.lo;
                                  hi = l.hi;
                                }
                                const auto density = [&](double z) {
                                  if constexpr (std::is_same_v<L, AxisExponential>)
                                    return std::exp(-z / l.mean) / l.mean;
                                  else
                                    return 1.0 / (l.hi - l.lo);
                                };
                                const auto f = [&](double z) {
                                  return (std::exp(-v * z) - 1.0 + v * std::min(1.0, z)) *
                                         density(z);
                                };
                                return quad::adaptive_simpson(f, lo, hi, kTol);
                              },
                              s.law);
        } else {
          double acc = 0.0;
          for (const auto& t : s.terms) acc += branching_integral(t, v);
          return acc;
        }
      },
      mu.node);
}

// ∫ (1 - e^{-v z}) nu(dz): the jump part of the immigration mechanism.
inline double immigration_integral(const LevyMeasureSpec& nu, double v) {
  if (v == 0.0) return 0.0;
  constexpr double kTol = 1e-12;
  return std::visit(
      [&](const auto& s) -> double {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, ZeroMeasure>) {
          return 0.0;
        } else if constexpr (std::is_same_v<T, FiniteAtoms>) {
          double acc = 0.0;
          for (const auto& a : s.atoms) acc += a.mass * (1.0 - std::exp(-v * a.z[0]));
          return acc;
        } else if constexpr (std::is_same_v<T, PerCoordinateStable> ||
                             std::is_same_v<T, TruncatedStableCone>) {
          double alpha;
          bool truncated;
          if constexpr (std::is_same_v<T, PerCoordinateStable>) {
            alpha = s.alpha;
            truncated = s.truncated;
          } else {
            alpha = s.alpha;
            truncated = true;
          }
          // finite-variation immigration requires alpha < 1 here
          const double z0 = std::min(0.25 / v, 1.0);
          double acc = 0.0;
          {
            double fact = 1.0, sign = 1.0;
            for (int m = 1; m <= 12; ++m) {
              acc += sign * std::pow(v, m) * std::pow(z0, m - alpha) / (fact * (m - alpha));
              sign = -sign;
              fact *= m + 1.0;
            }
          }
          if (z0 < 1.0) {
            const auto f = [&](double z) {
              return (1.0 - std::exp(-v * z)) * std::pow(z, -1.0 - alpha);
            };
            acc += quad::adaptive_simpson(f, z0, 1.0, kTol);
          }
          if (!truncated) {
            acc += 1.0 / alpha;
            const double zhi = 1.0 + 50.0 / v;
            const auto g = [&](double z) { return std::exp(-v * z) * std::pow(z, -1.0 - alpha); };
            acc -= quad::adaptive_simpson(g, 1.0, zhi, kTol);
          }
          return acc;
        } else if constexpr (std::is_same_v<T, CompoundPoisson>) {
          return s.rate * std::visit(
                              [&](const auto& l) -> double {
                                using L = std::decay_t<decltype(l)>;
                                double lo, hi;
                                if constexpr (std::is_same_v<L, AxisExponential>) {
                                  lo = 0.0;
                                  hi = l.mean * 50.0 + 50.0;
                                } else {
                                  lo = l.lo;
                                  hi = l.hi;
                                }
                                const auto density = [&](double z) {
                                  if constexpr (std::is_same_v<L, AxisExponential>)
                                    return std::exp(-z / l.mean) / l.mean;
                                  else
                                    return 1.0 / (l.hi - l.lo);
                                };
                                const auto f = [&](double z) {
                                  return (1.0 - std::exp(-v * z)) * density(z);
                                };
                                return quad::adaptive_simpson(f, lo, hi, kTol);
                              },
                              s.law);
        } else {
          double acc = 0.0;
          for (const auto& t : s.terms) acc += immigration_integral(t, v);
          return acc;
        }
      },
      nu.node);
}

}  // namespace oracle_detail

// Solution of the generalized Riccati pair
//   v' = b v - c v^2 - ∫(e^{-vz} - 1 + v(1∧z)) mu(dz),   v(0) = lambda0,
//   A' = beta v + ∫(1 - e^{-vz}) nu(dz),                 A(0) = 0,
// recorded on the accepted adaptive grid.
struct RiccatiSolution {
  double lambda0 = 0.0;
  Vec grid;
  Vec v;
  Vec immigration_integral;  // A(t_k)
};

// Cash-Karp 4(5) with step-size control; per-unit-time error <= tol.
inline RiccatiSolution riccati_solve(const AdmissibleParams& p, double t, double lambda,
                                     double tol = 1e-10) {
  if (p.dim() != 1) throw OutOfRange("riccati_solve: one-dimensional oracle only");
  if (lambda < 0.0) throw OutOfRange("riccati_solve: need lambda >= 0");
  if (!(t > 0.0)) throw OutOfRange("riccati_solve: need t > 0");
  const double b = p.B(0, 0), c = p.c[0], beta = p.beta[0];

  const auto fv = [&](double v) {
    return b * v - c * v * v - oracle_detail::branching_integral(p.mu[0], v);
  };
  const auto fA = [&](double v) {
    return beta * v + oracle_detail::immigration_integral(p.nu, v);
  };

  RiccatiSolution sol;
  sol.lambda0 = lambda;
  double s = 0.0, v = lambda, A = 0.0;
  sol.grid.push_back(0.0);
  sol.v.push_back(v);
  sol.immigration_integral.push_back(0.0);

  double h = std::min(t, 0.01);
  long steps = 0;
  while (s < t) {
    if (++steps > 1'000'000) throw OdeFailure("riccati_solve: step limit exceeded");
    h = std::min(h, t - s);
    // Cash-Karp stages (v and A advanced jointly; A does not feed back)
    const double k1v = fv(v), k1A = fA(v);
    const double v2 = v + h * (0.2 * k1v);
    const double k2v = fv(v2), k2A = fA(v2);
    const double v3 = v + h * (3.0 / 40.0 * k1v + 9.0 / 40.0 * k2v);
    const double k3v = fv(v3), k3A = fA(v3);
    const double v4 = v + h * (0.3 * k1v - 0.9 * k2v + 1.2 * k3v);
    const double k4v = fv(v4), k4A = fA(v4);
    const double v5 = v + h * (-11.0 / 54.0 * k1v + 2.5 * k2v - 70.0 / 27.0 * k3v + 35.0 / 27.0 * k4v);
    const double k5v = fv(v5), k5A = fA(v5);
    const double v6 = v + h * (1631.0 / 55296.0 * k1v + 175.0 / 512.0 * k2v +
                               575.0 / 13824.0 * k3v + 44275.0 / 110592.0 * k4v +
                               253.0 / 4096.0 * k5v);
    const double k6v = fv(v6), k6A = fA(v6);

    const double dv5 = h * (37.0 / 378.0 * k1v + 250.0 / 621.0 * k3v + 125.0 / 594.0 * k4v +
                            512.0 / 1771.0 * k6v);
    const double dv4 = h * (2825.0 / 27648.0 * k1v + 18575.0 / 48384.0 * k3v +
                            13525.0 / 55296.0 * k4v + 277.0 / 14336.0 * k5v + 0.25 * k6v);
    const double dA5 = h * (37.0 / 378.0 * k1A + 250.0 / 621.0 * k3A + 125.0 / 594.0 * k4A +
                            512.0 / 1771.0 * k6A);
    const double dA4 = h * (2825.0 / 27648.0 * k1A + 18575.0 / 48384.0 * k3A +
                            13525.0 / 55296.0 * k4A + 277.0 / 14336.0 * k5A + 0.25 * k6A);

    const double err = std::max(std::abs(dv5 - dv4), std::abs(dA5 - dA4));
    const double allowed = tol * h;
    if (err <= allowed || h <= 1e-14 * t) {
      if (h <= 1e-14 * t && err > allowed)
        throw OdeFailure("riccati_solve: step size underflow");
      s += h;
      v = std::max(0.0, v + dv5);
      A += dA5;
      sol.grid.push_back(s);
      sol.v.push_back(v);
      sol.immigration_integral.push_back(A);
    }
    const double scale =
        err > 0.0 ? 0.9 * std::pow(allowed / err, 0.2) : 5.0;
    h *= std::min(5.0, std::max(0.2, scale));
  }
  return sol;
}

// E[e^{-lambda X(t)} | X(0)=x0] for a one-dimensional CBI tuple, by adaptive
// integration of the Riccati pair. Reduces to laplace_cir when mu = nu = 0.
inline double laplace_cbi_1d(const AdmissibleParams& p, double x0, double t, double lambda,
                             double tol = 1e-10) {
  if (lambda == 0.0) return 1.0;
  const RiccatiSolution sol = riccati_solve(p, t, lambda, tol);
  return std::exp(-sol.immigration_integral.back() - x0 * sol.v.back());
}

}  // namespace cbi
