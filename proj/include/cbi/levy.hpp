#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <variant>
#include <vector>

#include "cbi/errors.hpp"
#include "cbi/quadrature.hpp"
#include "cbi/rng.hpp"
#include "cbi/vecmat.hpp"

namespace cbi {

// Radial region on the orthant: { z : lo < |z| <= hi } (Euclidean norm).
struct Region {
  double lo = 0.0;
  double hi = std::numeric_limits<double>::infinity();

  static Region ball(double r) { return {0.0, r}; }
  static Region tail(double r) { return {r, std::numeric_limits<double>::infinity()}; }
  static Region shell(double lo, double hi) { return {lo, hi}; }
  static Region all() { return {}; }
};

enum class RegionTag { Small, Large };

// Jump events of one source over one time step.
struct JumpBatch {
  Vec times;                // offsets in (0, dt], ascending
  std::vector<Vec> sizes;   // points in R_+^d
  RegionTag region = RegionTag::Small;
};

struct LevyMeasureSpec;

struct ZeroMeasure {};

// 1_{(0,cap]}(z_j) dz_j / z_j^{1+alpha} on coordinate axis `coordinate`,
// cap = 1 when truncated, +inf otherwise.
struct PerCoordinateStable {
  int coordinate = 0;  // 0-based
  double alpha = 0.5;
  bool truncated = true;
};

// 1_{z in R_+^d, |z| <= 1} dz / |z|^{d+alpha}; always truncated at |z| = 1.
struct TruncatedStableCone {
  double alpha = 0.5;
};

struct FiniteAtoms {
  struct Atom {
    double mass = 0.0;
    Vec z;
  };
  std::vector<Atom> atoms;
};

// Parametric jump laws for compound Poisson parts, supported on one axis so
// every moment stays analytic or 1-d quadrature.
struct AxisExponential {
  int coordinate = 0;
  double mean = 1.0;
};
struct AxisUniform {
  int coordinate = 0;
  double lo = 0.0;
  double hi = 1.0;
};
using JumpLaw = std::variant<AxisExponential, AxisUniform>;

struct CompoundPoisson {
  double rate = 0.0;
  JumpLaw law;
};

struct SumSpec {
  std::vector<LevyMeasureSpec> terms;
};

struct LevyMeasureSpec {
  std::variant<ZeroMeasure, PerCoordinateStable, TruncatedStableCone, FiniteAtoms,
               CompoundPoisson, SumSpec>
      node;

  LevyMeasureSpec() : node(ZeroMeasure{}) {}
  template <class T>
  LevyMeasureSpec(T v) : node(std::move(v)) {}

  bool is_zero() const { return std::holds_alternative<ZeroMeasure>(node); }
};

inline LevyMeasureSpec sum_of(std::vector<LevyMeasureSpec> terms) {
  // flatten nested sums, drop explicit zeros
  std::vector<LevyMeasureSpec> flat;
  for (auto& t : terms) {
    if (t.is_zero()) continue;
    if (auto* s = std::get_if<SumSpec>(&t.node)) {
      for (auto& inner : s->terms) flat.push_back(std::move(inner));
    } else {
      flat.push_back(std::move(t));
    }
  }
  if (flat.empty()) return LevyMeasureSpec{ZeroMeasure{}};
  if (flat.size() == 1) return std::move(flat.front());
  return LevyMeasureSpec{SumSpec{std::move(flat)}};
}

namespace levy_detail {

constexpr double kPi = 3.14159265358979323846;
constexpr double kQuadTol = 1e-10;

// Surface area of the positive-orthant patch of S^{d-1}.
inline double patch_area(int d) {
  const double sphere = 2.0 * std::pow(kPi, 0.5 * d) / std::tgamma(0.5 * d);
  return sphere * std::pow(2.0, -d);
}

// ∫_patch u_i dΩ(u); identical for every i by symmetry.
inline double patch_first_moment(int d) {
  const double mean_abs = std::tgamma(0.5 * d) / (std::sqrt(kPi) * std::tgamma(0.5 * (d + 1)));
  const double sphere = 2.0 * std::pow(kPi, 0.5 * d) / std::tgamma(0.5 * d);
  return sphere * mean_abs * std::pow(2.0, -d);
}

// g_alpha(x) = ∫_0^x (1 - cos u) u^{-1-alpha} du for alpha in (0,2).
// Series head below u = 1/4, Gauss-Legendre panels beyond; the cumulative
// table serves the cone's angular quadrature with O(log n) lookups.
class OneMinusCosPower {
 public:
  static double series_head(double alpha, double x) {
    // (1-cos u) = sum (-1)^{m+1} u^{2m}/(2m)!
    double fact = 2.0;  // (2m)! starting at m=1
    double sum = 0.0, sign = 1.0;
    for (int m = 1; m <= 6; ++m) {
      sum += sign * std::pow(x, 2.0 * m - alpha) / (fact * (2.0 * m - alpha));
      sign = -sign;
      fact *= (2.0 * m + 1.0) * (2.0 * m + 2.0);
    }
    return sum;
  }

  static double direct(double alpha, double x) {
    if (x <= 0.0) return 0.0;
    const double head = std::min(x, 0.25);
    double r = series_head(alpha, head);
    double lo = head;
    const auto f = [alpha](double u) { return (1.0 - std::cos(u)) * std::pow(u, -1.0 - alpha); };
    while (lo < x) {
      const double hi = std::min(x, lo + 0.5 * kPi);
      r += quad::gl15(f, lo, hi);
      lo = hi;
    }
    return r;
  }

  // ∫_0^inf; finite for alpha in (0,2).
  static double limit(double alpha) {
    if (std::abs(alpha - 1.0) < 1e-6) return 0.5 * kPi / alpha;
    return std::tgamma(2.0 - alpha) * std::cos(0.5 * kPi * alpha) / (alpha * (1.0 - alpha));
  }

  OneMinusCosPower(double alpha, double x_max) : alpha_(alpha) {
    nodes_.push_back(0.25);
    cum_.push_back(series_head(alpha, 0.25));
    const auto f = [alpha](double u) { return (1.0 - std::cos(u)) * std::pow(u, -1.0 - alpha); };
    double lo = 0.25;
    while (lo < x_max) {
      const double hi = lo + 0.25 * kPi;
      cum_.push_back(cum_.back() + quad::gl15(f, lo, hi));
      nodes_.push_back(hi);
      lo = hi;
    }
  }

  double at(double x) const {
    if (x <= 0.0) return 0.0;
    if (x <= 0.25) return series_head(alpha_, x);
    const auto f = [a = alpha_](double u) { return (1.0 - std::cos(u)) * std::pow(u, -1.0 - a); };
    if (x >= nodes_.back()) {
      double r = cum_.back(), lo = nodes_.back();
      while (lo < x) {
        const double hi = std::min(x, lo + 0.25 * kPi);
        r += quad::gl15(f, lo, hi);
        lo = hi;
      }
      return r;
    }
    const auto it = std::upper_bound(nodes_.begin(), nodes_.end(), x);
    const std::size_t k = static_cast<std::size_t>(it - nodes_.begin()) - 1;
    return cum_[k] + quad::gl15(f, nodes_[k], x);
  }

 private:
  double alpha_;
  std::vector<double> nodes_;
  std::vector<double> cum_;
};

// ∫ (1 - cos(s z)) z^{-1-alpha} dz over (0, cap], cap in {1, +inf}.
inline double one_minus_cos_power(double s, double alpha, double cap) {
  s = std::abs(s);
  if (s == 0.0) return 0.0;
  if (std::isinf(cap)) return std::pow(s, alpha) * OneMinusCosPower::limit(alpha);
  return std::pow(s, alpha) * OneMinusCosPower::direct(alpha, s * cap);
}

struct RadialInterval {
  double lo = 0.0, hi = 0.0;
  bool empty() const { return hi <= lo; }
};

inline RadialInterval clip(const Region& r, double cap) {
  return {std::max(r.lo, 0.0), std::min(r.hi, cap)};
}

// Inverse-CDF draw of the radius with density ∝ r^{-1-alpha} on (a, b].
inline double stable_radius(double a, double b, double alpha, RngStream& rng) {
  const double pa = std::pow(a, -alpha);
  const double pb = std::isinf(b) ? 0.0 : std::pow(b, -alpha);
  const double u = rng.uniform();
  return std::pow(pa - u * (pa - pb), -1.0 / alpha);
}

// Uniform direction on the positive-orthant sphere patch by rejection from
// the full sphere (acceptance 2^-d).
inline Vec patch_direction(int d, RngStream& rng) {
  Vec u(static_cast<std::size_t>(d));
  for (;;) {
    double n2 = 0.0;
    for (auto& v : u) {
      v = rng.normal();
      n2 += v * v;
    }
    if (n2 == 0.0) continue;
    bool ok = true;
    for (double v : u)
      if (v < 0.0) {
        ok = false;
        break;
      }
    if (!ok) continue;
    const double inv = 1.0 / std::sqrt(n2);
    for (auto& v : u) v *= inv;
    return u;
  }
}

}  // namespace levy_detail

// ---------------------------------------------------------------------------
// Integral functionals
// ---------------------------------------------------------------------------

Moment levy_mass(const LevyMeasureSpec& spec, int dim, Region region);
Moment levy_moment(const LevyMeasureSpec& spec, int dim, double p, Region region);
Moment levy_coordinate_moment(const LevyMeasureSpec& spec, int dim, int j, Region region);
Moment levy_min1_moment(const LevyMeasureSpec& spec, int dim, int j);
double levy_symbol_re(const LevyMeasureSpec& spec, int dim, const Vec& lambda, bool unit_ball_only);

namespace levy_detail {

inline Moment law_moment(const JumpLaw& law, double p, const Region& region) {
  return std::visit(
      [&](const auto& l) -> Moment {
        using T = std::decay_t<decltype(l)>;
        const double a = std::max(region.lo, 0.0);
        if constexpr (std::is_same_v<T, AxisExponential>) {
          const double theta = l.mean;
          const double b = std::min(region.hi, a + 50.0 * theta + 50.0);
          if (b <= a) return Moment::finite(0.0);
          const auto f = [&](double z) { return std::pow(z, p) * std::exp(-z / theta) / theta; };
          return Moment::finite(quad::adaptive_simpson(f, a, b, kQuadTol));
        } else {
          const double lo = std::max(a, l.lo), hi = std::min(region.hi, l.hi);
          if (hi <= lo) return Moment::finite(0.0);
          return power_integral(p, lo, hi) * (1.0 / (l.hi - l.lo));
        }
      },
      law);
}

inline double law_prob(const JumpLaw& law, const Region& region) {
  return std::visit(
      [&](const auto& l) -> double {
        using T = std::decay_t<decltype(l)>;
        const double a = std::max(region.lo, 0.0);
        if constexpr (std::is_same_v<T, AxisExponential>) {
          const double ea = std::exp(-a / l.mean);
          const double eb = std::isinf(region.hi) ? 0.0 : std::exp(-region.hi / l.mean);
          return std::max(0.0, ea - eb);
        } else {
          const double lo = std::max(a, l.lo), hi = std::min(region.hi, l.hi);
          return hi <= lo ? 0.0 : (hi - lo) / (l.hi - l.lo);
        }
      },
      law);
}

inline int law_coordinate(const JumpLaw& law) {
  return std::visit([](const auto& l) { return l.coordinate; }, law);
}

}  // namespace levy_detail

inline Moment levy_mass(const LevyMeasureSpec& spec, int dim, Region region) {
  using namespace levy_detail;
  return std::visit(
      [&](const auto& s) -> Moment {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, ZeroMeasure>) {
          return Moment::finite(0.0);
        } else if constexpr (std::is_same_v<T, PerCoordinateStable>) {
          const auto iv = clip(region, s.truncated ? 1.0 : std::numeric_limits<double>::infinity());
          if (iv.empty()) return Moment::finite(0.0);
          return power_integral(-1.0 - s.alpha, iv.lo, iv.hi);
        } else if constexpr (std::is_same_v<T, TruncatedStableCone>) {
          const auto iv = clip(region, 1.0);
          if (iv.empty()) return Moment::finite(0.0);
          return power_integral(-1.0 - s.alpha, iv.lo, iv.hi) * patch_area(dim);
        } else if constexpr (std::is_same_v<T, FiniteAtoms>) {
          double m = 0.0;
          for (const auto& a : s.atoms) {
            const double r = norm2(a.z);
            if (r > region.lo && r <= region.hi) m += a.mass;
          }
          return Moment::finite(m);
        } else if constexpr (std::is_same_v<T, CompoundPoisson>) {
          return Moment::finite(s.rate * law_prob(s.law, region));
        } else {
          Moment m = Moment::finite(0.0);
          for (const auto& t : s.terms) m += levy_mass(t, dim, region);
          return m;
        }
      },
      spec.node);
}

inline Moment levy_moment(const LevyMeasureSpec& spec, int dim, double p, Region region) {
  using namespace levy_detail;
  return std::visit(
      [&](const auto& s) -> Moment {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, ZeroMeasure>) {
          return Moment::finite(0.0);
        } else if constexpr (std::is_same_v<T, PerCoordinateStable>) {
          const auto iv = clip(region, s.truncated ? 1.0 : std::numeric_limits<double>::infinity());
          if (iv.empty()) return Moment::finite(0.0);
          return power_integral(p - 1.0 - s.alpha, iv.lo, iv.hi);
        } else if constexpr (std::is_same_v<T, TruncatedStableCone>) {
          const auto iv = clip(region, 1.0);
          if (iv.empty()) return Moment::finite(0.0);
          return power_integral(p - 1.0 - s.alpha, iv.lo, iv.hi) * patch_area(dim);
        } else if constexpr (std::is_same_v<T, FiniteAtoms>) {
          double m = 0.0;
          for (const auto& a : s.atoms) {
            const double r = norm2(a.z);
            if (r > region.lo && r <= region.hi) m += a.mass * std::pow(r, p);
          }
          return Moment::finite(m);
        } else if constexpr (std::is_same_v<T, CompoundPoisson>) {
          return law_moment(s.law, p, region) * s.rate;
        } else {
          Moment m = Moment::finite(0.0);
          for (const auto& t : s.terms) m += levy_moment(t, dim, p, region);
          return m;
        }
      },
      spec.node);
}

inline Moment levy_coordinate_moment(const LevyMeasureSpec& spec, int dim, int j, Region region) {
  using namespace levy_detail;
  return std::visit(
      [&](const auto& s) -> Moment {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, ZeroMeasure>) {
          return Moment::finite(0.0);
        } else if constexpr (std::is_same_v<T, PerCoordinateStable>) {
          if (j != s.coordinate) return Moment::finite(0.0);
          const auto iv = clip(region, s.truncated ? 1.0 : std::numeric_limits<double>::infinity());
          if (iv.empty()) return Moment::finite(0.0);
          return power_integral(-s.alpha, iv.lo, iv.hi);
        } else if constexpr (std::is_same_v<T, TruncatedStableCone>) {
          const auto iv = clip(region, 1.0);
          if (iv.empty()) return Moment::finite(0.0);
          return power_integral(-s.alpha, iv.lo, iv.hi) * patch_first_moment(dim);
        } else if constexpr (std::is_same_v<T, FiniteAtoms>) {
          double m = 0.0;
          for (const auto& a : s.atoms) {
            const double r = norm2(a.z);
            if (r > region.lo && r <= region.hi) m += a.mass * a.z[static_cast<std::size_t>(j)];
          }
          return Moment::finite(m);
        } else if constexpr (std::is_same_v<T, CompoundPoisson>) {
          if (j != law_coordinate(s.law)) return Moment::finite(0.0);
          return law_moment(s.law, 1.0, region) * s.rate;
        } else {
          Moment m = Moment::finite(0.0);
          for (const auto& t : s.terms) m += levy_coordinate_moment(t, dim, j, region);
          return m;
        }
      },
      spec.node);
}

// ∫ (1 ∧ z_j) spec(dz) over the whole orthant.
inline Moment levy_min1_moment(const LevyMeasureSpec& spec, int dim, int j) {
  using namespace levy_detail;
  return std::visit(
      [&](const auto& s) -> Moment {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, ZeroMeasure>) {
          return Moment::finite(0.0);
        } else if constexpr (std::is_same_v<T, PerCoordinateStable>) {
          if (j != s.coordinate) return Moment::finite(0.0);
          const double cap = s.truncated ? 1.0 : std::numeric_limits<double>::infinity();
          Moment m = power_integral(-s.alpha, 0.0, std::min(1.0, cap));
          if (cap > 1.0) m += power_integral(-1.0 - s.alpha, 1.0, cap);
          return m;
        } else if constexpr (std::is_same_v<T, TruncatedStableCone>) {
          // z_j <= |z| <= 1 on the support, so 1 ∧ z_j = z_j
          return power_integral(-s.alpha, 0.0, 1.0) * patch_first_moment(dim);
        } else if constexpr (std::is_same_v<T, FiniteAtoms>) {
          double m = 0.0;
          for (const auto& a : s.atoms)
            m += a.mass * std::min(1.0, a.z[static_cast<std::size_t>(j)]);
          return Moment::finite(m);
        } else if constexpr (std::is_same_v<T, CompoundPoisson>) {
          if (j != law_coordinate(s.law)) return Moment::finite(0.0);
          Moment m = law_moment(s.law, 1.0, Region::ball(1.0));
          m += Moment::finite(law_prob(s.law, Region::tail(1.0)));
          return m * s.rate;
        } else {
          Moment m = Moment::finite(0.0);
          for (const auto& t : s.terms) m += levy_min1_moment(t, dim, j);
          return m;
        }
      },
      spec.node);
}

// Componentwise ∫_{delta < |z| <= r} z spec(dz); finite for admissible specs.
inline Vec small_jump_drift(const LevyMeasureSpec& spec, int dim, double delta, double r) {
  if (!(delta >= 0.0) || !(r > delta)) throw OutOfRange("small_jump_drift: need 0 <= delta < r");
  Vec out(static_cast<std::size_t>(dim), 0.0);
  for (int j = 0; j < dim; ++j) {
    const Moment m = levy_coordinate_moment(spec, dim, j, Region::shell(delta, r));
    if (m.divergent)
      throw QuadratureFailure("small_jump_drift: divergent first moment over the shell");
    out[static_cast<std::size_t>(j)] = m.value;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Sampling
// ---------------------------------------------------------------------------

// Region-restricted sampler with the per-leaf bookkeeping flattened out of the
// hot loop. Construction computes the restricted mass; sampling is O(#leaves).
class RestrictedSampler {
 public:
  RestrictedSampler() = default;

  RestrictedSampler(const LevyMeasureSpec& spec, int dim, Region region)
      : dim_(dim), region_(region) {
    collect(spec, region);
    double acc = 0.0;
    for (auto& l : leaves_) {
      acc += l.mass;
      l.cum = acc;
    }
    total_ = acc;
  }

  double mass() const { return total_; }
  bool empty() const { return total_ <= 0.0; }

  Vec sample(RngStream& rng) const {
    const double u = rng.uniform() * total_;
    std::size_t k = 0;
    while (k + 1 < leaves_.size() && leaves_[k].cum < u) ++k;
    return leaves_[k].draw(dim_, rng);
  }

 private:
  struct Leaf {
    enum class Kind { Stable, Cone, Atom, Exp, Uniform } kind = Kind::Atom;
    double mass = 0.0, cum = 0.0;
    int axis = 0;
    double alpha = 0.0;
    double lo = 0.0, hi = 0.0;  // radial interval or law interval
    double mean = 0.0;          // exponential law
    Vec atom;

    Vec draw(int dim, RngStream& rng) const {
      using namespace levy_detail;
      Vec z(static_cast<std::size_t>(dim), 0.0);
      switch (kind) {
        case Kind::Stable:
          z[static_cast<std::size_t>(axis)] = stable_radius(lo, hi, alpha, rng);
          break;
        case Kind::Cone: {
          const double r = stable_radius(lo, hi, alpha, rng);
          z = patch_direction(dim, rng);
          for (auto& v : z) v *= r;
          break;
        }
        case Kind::Atom:
          z = atom;
          break;
        case Kind::Exp: {
          const double ea = std::exp(-lo / mean);
          const double eb = std::isinf(hi) ? 0.0 : std::exp(-hi / mean);
          z[static_cast<std::size_t>(axis)] = -mean * std::log(ea - rng.uniform() * (ea - eb));
          break;
        }
        case Kind::Uniform:
          z[static_cast<std::size_t>(axis)] = rng.uniform(lo, hi);
          break;
      }
      return z;
    }
  };

  void collect(const LevyMeasureSpec& spec, const Region& region) {
    using namespace levy_detail;
    std::visit(
        [&](const auto& s) {
          using T = std::decay_t<decltype(s)>;
          if constexpr (std::is_same_v<T, ZeroMeasure>) {
          } else if constexpr (std::is_same_v<T, PerCoordinateStable>) {
            const auto iv =
                clip(region, s.truncated ? 1.0 : std::numeric_limits<double>::infinity());
            if (iv.empty()) return;
            const Moment m = power_integral(-1.0 - s.alpha, iv.lo, iv.hi);
            if (m.divergent)
              throw InfiniteMass("sample_jumps: stable mass diverges; raise the cutoff");
            if (m.value > 0.0)
              leaves_.push_back({Leaf::Kind::Stable, m.value, 0.0, s.coordinate, s.alpha, iv.lo,
                                 iv.hi, 0.0, {}});
          } else if constexpr (std::is_same_v<T, TruncatedStableCone>) {
            const auto iv = clip(region, 1.0);
            if (iv.empty()) return;
            const Moment m = power_integral(-1.0 - s.alpha, iv.lo, iv.hi) * patch_area(dim_);
            if (m.divergent)
              throw InfiniteMass("sample_jumps: cone mass diverges; raise the cutoff");
            if (m.value > 0.0)
              leaves_.push_back(
                  {Leaf::Kind::Cone, m.value, 0.0, 0, s.alpha, iv.lo, iv.hi, 0.0, {}});
          } else if constexpr (std::is_same_v<T, FiniteAtoms>) {
            for (const auto& a : s.atoms) {
              const double r = norm2(a.z);
              if (r > region.lo && r <= region.hi && a.mass > 0.0)
                leaves_.push_back({Leaf::Kind::Atom, a.mass, 0.0, 0, 0.0, 0.0, 0.0, 0.0, a.z});
            }
          } else if constexpr (std::is_same_v<T, CompoundPoisson>) {
            const double m = s.rate * law_prob(s.law, region);
            if (m <= 0.0) return;
            std::visit(
                [&](const auto& l) {
                  using L = std::decay_t<decltype(l)>;
                  if constexpr (std::is_same_v<L, AxisExponential>) {
                    leaves_.push_back({Leaf::Kind::Exp, m, 0.0, l.coordinate, 0.0,
                                       std::max(region.lo, 0.0), region.hi, l.mean, {}});
                  } else {
                    leaves_.push_back({Leaf::Kind::Uniform, m, 0.0, l.coordinate, 0.0,
                                       std::max(region.lo, l.lo), std::min(region.hi, l.hi), 0.0,
                                       {}});
                  }
                },
                s.law);
          } else {
            for (const auto& t : s.terms) collect(t, region);
          }
        },
        spec.node);
  }

  int dim_ = 1;
  Region region_;
  std::vector<Leaf> leaves_;
  double total_ = 0.0;
};

// Jumps of `spec` restricted to `region`, thinned at `intensity_scale`, over a
// step of length dt: the count is Poisson(intensity_scale * mass * dt), sizes
// i.i.d. from the normalized restriction, times i.i.d. uniform on the step.
inline JumpBatch sample_jumps(const RestrictedSampler& sampler, Region region,
                              double intensity_scale, double dt, RngStream& rng) {
  JumpBatch batch;
  batch.region = region.lo >= 1.0 ? RegionTag::Large : RegionTag::Small;
  if (intensity_scale <= 0.0 || sampler.empty()) return batch;
  const double mean = intensity_scale * sampler.mass() * dt;
  const std::uint64_t n = rng.poisson(mean);
  if (n == 0) return batch;
  batch.times.resize(n);
  for (auto& t : batch.times) t = rng.uniform() * dt;
  std::sort(batch.times.begin(), batch.times.end());
  batch.sizes.reserve(n);
  for (std::uint64_t i = 0; i < n; ++i) batch.sizes.push_back(sampler.sample(rng));
  return batch;
}

inline JumpBatch sample_jumps(const LevyMeasureSpec& spec, int dim, Region region,
                              double intensity_scale, double dt, RngStream& rng) {
  return sample_jumps(RestrictedSampler(spec, dim, region), region, intensity_scale, dt, rng);
}

// ---------------------------------------------------------------------------
// Symbol
// ---------------------------------------------------------------------------

namespace levy_detail {

inline double cone_symbol(const TruncatedStableCone& s, int dim, const Vec& lambda) {
  const double lnorm = norm2(lambda);
  if (lnorm == 0.0) return 0.0;
  const double alpha = s.alpha;
  OneMinusCosPower table(alpha, lnorm + 1.0);
  const auto phi = [&](double t) {
    t = std::abs(t);
    if (t == 0.0) return 0.0;
    return std::pow(t, alpha) * table.at(t);
  };
  switch (dim) {
    case 1:
      return phi(lambda[0]);
    case 2: {
      const auto f = [&](double th) { return phi(lambda[0] * std::cos(th) + lambda[1] * std::sin(th)); };
      return quad::adaptive_simpson(f, 0.0, 0.5 * kPi, 1e-9 * (1.0 + std::pow(lnorm, alpha)));
    }
    case 3: {
      // u = (sin t1 cos t2, sin t1 sin t2, cos t1), dΩ = sin t1 dt1 dt2
      const auto inner = [&](double t1) {
        const double st = std::sin(t1), ct = std::cos(t1);
        const auto f2 = [&](double t2) {
          return phi(lambda[0] * st * std::cos(t2) + lambda[1] * st * std::sin(t2) +
                     lambda[2] * ct);
        };
        return st * quad::gl15(f2, 0.0, 0.5 * kPi);
      };
      double acc = 0.0;
      const int n1 = 24;
      for (int i = 0; i < n1; ++i)
        acc += quad::gl15(inner, 0.5 * kPi * i / n1, 0.5 * kPi * (i + 1) / n1);
      return acc;
    }
    case 4: {
      // hyperspherical angles, dΩ = sin^2 t1 sin t2 dt1 dt2 dt3
      double acc = 0.0;
      const int n = 12;
      const double h = 0.5 * kPi / n;
      for (int i = 0; i < n; ++i) {
        const auto f1 = [&](double t1) {
          const double s1 = std::sin(t1), c1 = std::cos(t1);
          double acc2 = 0.0;
          for (int j = 0; j < n; ++j) {
            const auto f2 = [&](double t2) {
              const double s2 = std::sin(t2), c2 = std::cos(t2);
              double acc3 = 0.0;
              for (int k = 0; k < n; ++k) {
                const auto f3 = [&](double t3) {
                  return phi(lambda[0] * c1 + lambda[1] * s1 * c2 + lambda[2] * s1 * s2 * std::cos(t3) +
                             lambda[3] * s1 * s2 * std::sin(t3));
                };
                acc3 += quad::gl15(f3, k * h, (k + 1) * h);
              }
              return s2 * acc3;
            };
            acc2 += quad::gl15(f2, j * h, (j + 1) * h);
          }
          return s1 * s1 * acc2;
        };
        acc += quad::gl15(f1, i * h, (i + 1) * h);
      }
      return acc;
    }
    default:
      throw OutOfRange("cone symbol: dimension must be 1..4");
  }
}

inline double law_symbol(const CompoundPoisson& cp, const Vec& lambda, bool unit_ball_only) {
  using namespace levy_detail;
  const int k = law_coordinate(cp.law);
  const double s = std::abs(lambda[static_cast<std::size_t>(k)]);
  if (s == 0.0 || cp.rate <= 0.0) return 0.0;
  return std::visit(
      [&](const auto& l) -> double {
        using L = std::decay_t<decltype(l)>;
        double lo = 0.0, hi;
        if constexpr (std::is_same_v<L, AxisExponential>) {
          hi = unit_ball_only ? 1.0 : l.mean * 50.0 + 50.0;
        } else {
          lo = l.lo;
          hi = unit_ball_only ? std::min(1.0, l.hi) : l.hi;
        }
        if (hi <= lo) return 0.0;
        const auto density = [&](double z) {
          if constexpr (std::is_same_v<L, AxisExponential>)
            return std::exp(-z / l.mean) / l.mean;
          else
            return 1.0 / (l.hi - l.lo);
        };
        const auto f = [&](double z) { return (1.0 - std::cos(s * z)) * density(z); };
        double acc = 0.0, a = lo;
        const double w = std::min(hi - lo, 0.5 * kPi / s);
        while (a < hi) {
          const double b = std::min(hi, a + w);
          acc += quad::gl15(f, a, b);
          a = b;
        }
        return cp.rate * acc;
      },
      cp.law);
}

}  // namespace levy_detail

// Re ∫ (1 - cos(λ·z)) spec(dz), optionally restricted to {|z| <= 1}
// (branching measures enter the noise symbol only through the unit ball).
inline double levy_symbol_re(const LevyMeasureSpec& spec, int dim, const Vec& lambda,
                             bool unit_ball_only) {
  using namespace levy_detail;
  return std::visit(
      [&](const auto& s) -> double {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, ZeroMeasure>) {
          return 0.0;
        } else if constexpr (std::is_same_v<T, PerCoordinateStable>) {
          const double cap =
              (s.truncated || unit_ball_only) ? 1.0 : std::numeric_limits<double>::infinity();
          const double lk = lambda[static_cast<std::size_t>(s.coordinate)];
          return one_minus_cos_power(lk, s.alpha, cap);
        } else if constexpr (std::is_same_v<T, TruncatedStableCone>) {
          return cone_symbol(s, dim, lambda);
        } else if constexpr (std::is_same_v<T, FiniteAtoms>) {
          double acc = 0.0;
          for (const auto& a : s.atoms) {
            if (unit_ball_only && norm2(a.z) > 1.0) continue;
            double dot = 0.0;
            for (std::size_t i = 0; i < a.z.size(); ++i) dot += lambda[i] * a.z[i];
            acc += a.mass * (1.0 - std::cos(dot));
          }
          return acc;
        } else if constexpr (std::is_same_v<T, CompoundPoisson>) {
          return law_symbol(s, lambda, unit_ball_only);
        } else {
          double acc = 0.0;
          for (const auto& t : s.terms) acc += levy_symbol_re(t, dim, lambda, unit_ball_only);
          return acc;
        }
      },
      spec.node);
}

}  // namespace cbi
