#pragma once

#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "cbi/errors.hpp"
#include "cbi/levy.hpp"
#include "cbi/vecmat.hpp"

namespace cbi {

// The defining tuple (c, beta, B, nu, mu) of a multi-type CBI process.
struct AdmissibleParams {
  Vec c;                            // diffusion coefficients, one per coordinate
  Vec beta;                         // immigration drift
  Mat B;                            // branching drift, nonnegative off-diagonal
  LevyMeasureSpec nu;               // immigration measure
  std::vector<LevyMeasureSpec> mu;  // branching measures, one per coordinate

  int dim() const { return static_cast<int>(c.size()); }
};

struct Violation {
  std::string condition;  // "(i)".."(vi)" or "spec"
  std::string message;
  double offending_value = 0.0;
};

struct ValidationReport {
  bool ok = false;
  std::vector<Violation> violations;
  std::map<std::string, double> integrals;
};

namespace params_detail {

inline void check_dimensions(const AdmissibleParams& p) {
  const std::size_t d = p.c.size();
  if (d == 0) throw DimensionMismatch("params: dimension zero");
  if (p.beta.size() != d) throw DimensionMismatch("params: |beta| != |c|");
  if (p.B.rows != d || p.B.cols != d) throw DimensionMismatch("params: B is not d x d");
  if (p.mu.size() != d) throw DimensionMismatch("params: |mu| != d");
}

inline void check_spec_structure(const LevyMeasureSpec& spec, int dim, const std::string& who,
                                 std::vector<Violation>& out) {
  std::visit(
      [&](const auto& s) {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, ZeroMeasure>) {
        } else if constexpr (std::is_same_v<T, PerCoordinateStable>) {
          if (s.coordinate < 0 || s.coordinate >= dim)
            throw DimensionMismatch(who + ": stable coordinate out of range");
          if (!(s.alpha > 0.0 && s.alpha < 2.0))
            out.push_back({"spec", who + ": stable alpha outside (0,2)", s.alpha});
        } else if constexpr (std::is_same_v<T, TruncatedStableCone>) {
          if (!(s.alpha > 0.0 && s.alpha < 2.0))
            out.push_back({"spec", who + ": cone alpha outside (0,2)", s.alpha});
        } else if constexpr (std::is_same_v<T, FiniteAtoms>) {
          for (const auto& a : s.atoms) {
            if (a.z.size() != static_cast<std::size_t>(dim))
              throw DimensionMismatch(who + ": atom dimension mismatch");
            if (!(a.mass > 0.0)) out.push_back({"spec", who + ": atom mass must be > 0", a.mass});
            if (norm2(a.z) == 0.0) out.push_back({"spec", who + ": atom at the origin", 0.0});
            for (double v : a.z)
              if (v < 0.0) out.push_back({"spec", who + ": atom outside the orthant", v});
          }
        } else if constexpr (std::is_same_v<T, CompoundPoisson>) {
          if (s.rate < 0.0) out.push_back({"spec", who + ": compound Poisson rate < 0", s.rate});
          std::visit(
              [&](const auto& l) {
                using L = std::decay_t<decltype(l)>;
                if (l.coordinate < 0 || l.coordinate >= dim)
                  throw DimensionMismatch(who + ": jump-law coordinate out of range");
                if constexpr (std::is_same_v<L, AxisExponential>) {
                  if (!(l.mean > 0.0))
                    out.push_back({"spec", who + ": exponential mean must be > 0", l.mean});
                } else {
                  if (!(l.hi > l.lo) || l.lo < 0.0)
                    out.push_back({"spec", who + ": uniform law needs 0 <= lo < hi", l.lo});
                }
              },
              s.law);
        } else {
          for (const auto& t : s.terms) check_spec_structure(t, dim, who, out);
        }
      },
      spec.node);
}

}  // namespace params_detail

// Checks conditions (i)-(vi): sign constraints, the off-diagonal structure of
// B, and the integrability of nu and each mu_i (closed forms where the
// measure family admits them, quadrature otherwise). Deterministic.
inline ValidationReport validate(const AdmissibleParams& p) {
  params_detail::check_dimensions(p);
  const int d = p.dim();
  ValidationReport rep;

  for (int i = 0; i < d; ++i) {
    if (!(p.c[static_cast<std::size_t>(i)] >= 0.0))
      rep.violations.push_back({"(i)", "c_" + std::to_string(i + 1) + " < 0",
                                p.c[static_cast<std::size_t>(i)]});
    if (!(p.beta[static_cast<std::size_t>(i)] >= 0.0))
      rep.violations.push_back({"(ii)", "beta_" + std::to_string(i + 1) + " < 0",
                                p.beta[static_cast<std::size_t>(i)]});
  }
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j)
      if (i != j && p.B(static_cast<std::size_t>(i), static_cast<std::size_t>(j)) < 0.0)
        rep.violations.push_back({"(iii)",
                                  "B[" + std::to_string(i + 1) + "][" + std::to_string(j + 1) +
                                      "] < 0 off the diagonal",
                                  p.B(static_cast<std::size_t>(i), static_cast<std::size_t>(j))});

  params_detail::check_spec_structure(p.nu, d, "nu", rep.violations);
  for (int i = 0; i < d; ++i)
    params_detail::check_spec_structure(p.mu[static_cast<std::size_t>(i)], d,
                                        "mu_" + std::to_string(i + 1), rep.violations);

  // (iv): ∫ (1 ∧ |z|) nu(dz) < inf
  {
    Moment m = levy_moment(p.nu, d, 1.0, Region::ball(1.0));
    m += levy_mass(p.nu, d, Region::tail(1.0));
    if (m.divergent)
      rep.violations.push_back({"(iv)", "int (1 ∧ |z|) nu(dz) diverges", m.value});
    else
      rep.integrals["nu: int (1^|z|)"] = m.value;
  }

  // (vi): for each i, ∫ (|z| ∧ |z|^2 + Σ_{j≠i} (1 ∧ z_j)) mu_i(dz) < inf
  for (int i = 0; i < d; ++i) {
    const auto& mu_i = p.mu[static_cast<std::size_t>(i)];
    const std::string tag = "mu_" + std::to_string(i + 1);
    Moment m = levy_moment(mu_i, d, 2.0, Region::ball(1.0));
    m += levy_moment(mu_i, d, 1.0, Region::tail(1.0));
    if (m.divergent)
      rep.violations.push_back({"(vi)", tag + ": int (|z| ∧ |z|^2) mu(dz) diverges", m.value});
    else
      rep.integrals[tag + ": int (|z|^|z|^2)"] = m.value;
    for (int j = 0; j < d; ++j) {
      if (j == i) continue;
      const Moment cross = levy_min1_moment(mu_i, d, j);
      if (cross.divergent)
        rep.violations.push_back(
            {"(vi)", tag + ": int (1 ∧ z_" + std::to_string(j + 1) + ") mu(dz) diverges",
             cross.value});
      else
        rep.integrals[tag + ": int (1^z_" + std::to_string(j + 1) + ")"] = cross.value;
    }
  }

  rep.ok = rep.violations.empty();
  return rep;
}

// Effective drift of the SDE representation: the compensator change moves the
// small-jump first moments onto the off-diagonal and the big-jump mass off
// the diagonal. Off-diagonal entries stay nonnegative for admissible tuples.
inline Mat effective_drift(const AdmissibleParams& p) {
  params_detail::check_dimensions(p);
  const int d = p.dim();
  Mat bt = p.B;
  for (int j = 0; j < d; ++j) {
    const auto& mu_j = p.mu[static_cast<std::size_t>(j)];
    for (int i = 0; i < d; ++i) {
      if (i == j) continue;
      const Moment m = levy_coordinate_moment(mu_j, d, i, Region::ball(1.0));
      if (m.divergent)
        throw QuadratureFailure("effective_drift: divergent small-jump first moment");
      bt(static_cast<std::size_t>(i), static_cast<std::size_t>(j)) += m.value;
    }
    const Moment big = levy_mass(mu_j, d, Region::tail(1.0));
    if (big.divergent) throw QuadratureFailure("effective_drift: infinite big-jump mass");
    bt(static_cast<std::size_t>(j), static_cast<std::size_t>(j)) -= big.value;
  }
  return bt;
}

// Re Ψ_x(λ) of the frozen-coefficient noise: diffusion + immigration symbol
// over the orthant + state-thinned branching symbols over the unit ball.
// Negative coordinates of x contribute nothing (orthant indicator).
inline double symbol_re(const AdmissibleParams& p, const Vec& x, const Vec& lambda) {
  params_detail::check_dimensions(p);
  const int d = p.dim();
  if (x.size() != static_cast<std::size_t>(d) || lambda.size() != static_cast<std::size_t>(d))
    throw DimensionMismatch("symbol_re: x or lambda has wrong dimension");
  double acc = 0.0;
  for (int j = 0; j < d; ++j) {
    const double xj = x[static_cast<std::size_t>(j)];
    if (xj < 0.0) continue;
    const double lj = lambda[static_cast<std::size_t>(j)];
    acc += 2.0 * p.c[static_cast<std::size_t>(j)] * xj * lj * lj;
  }
  acc += levy_symbol_re(p.nu, d, lambda, /*unit_ball_only=*/false);
  for (int j = 0; j < d; ++j) {
    const double xj = x[static_cast<std::size_t>(j)];
    if (xj <= 0.0) continue;
    acc += xj * levy_symbol_re(p.mu[static_cast<std::size_t>(j)], d, lambda,
                               /*unit_ball_only=*/true);
  }
  return acc;
}

}  // namespace cbi
