#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <vector>

#include "cbi/errors.hpp"
#include "cbi/quadrature.hpp"
#include "cbi/vecmat.hpp"

namespace cbi {

// Anisotropy vector a with sum a_i = d, generated from per-coordinate
// smoothing indices by the harmonic-mean construction.
struct Anisotropy {
  Vec a;
  double mean_alpha = 0.0;
};

inline Anisotropy anisotropy_from_alphas(const Vec& alpha) {
  if (alpha.empty()) throw OutOfRange("anisotropy_from_alphas: empty alpha");
  double inv_sum = 0.0;
  for (double ai : alpha) {
    if (!(ai > 0.0) || ai > 2.0)
      throw OutOfRange("anisotropy_from_alphas: alpha components must lie in (0,2]");
    inv_sum += 1.0 / ai;
  }
  Anisotropy an;
  an.mean_alpha = static_cast<double>(alpha.size()) / inv_sum;
  an.a.reserve(alpha.size());
  for (double ai : alpha) an.a.push_back(an.mean_alpha / ai);
  return an;
}

// Boundary weight rho_I(x) = min_{j in I} x_j^{1/alpha_j} on the orthant;
// rho_emptyset is the orthant indicator. Coordinates are 0-based.
inline double rho(const std::vector<int>& I, const Vec& alpha, const Vec& x) {
  for (double v : x)
    if (v < 0.0) return 0.0;
  double m = 1.0;
  for (int j : I) {
    if (j < 0 || static_cast<std::size_t>(j) >= x.size())
      throw OutOfRange("rho: index outside 1..d");
    m = std::min(m, std::pow(x[static_cast<std::size_t>(j)],
                             1.0 / alpha[static_cast<std::size_t>(j)]));
    if (m == 0.0) return 0.0;
  }
  return m;
}

// Tensor-grid density estimate. Node k of axis i sits at
// (origin_index[i] + k) * spacing[i]; spacings are exact powers of two so
// dyadic difference shifts land on whole cells.
struct DensityEstimate {
  std::vector<Vec> axes;  // node coordinates per axis
  Vec spacing;            // per-axis grid step (power of two)
  Vec values;             // row-major, axis 0 slowest
  Vec bandwidths;
  double total_mass = 0.0;

  int dim() const { return static_cast<int>(axes.size()); }
  double cell_volume() const {
    double v = 1.0;
    for (double s : spacing) v *= s;
    return v;
  }
};

namespace density_detail {

inline double pow2_at_most(double x) {
  return std::pow(2.0, std::floor(std::log2(x)));
}

inline int default_cells(int dim) {
  switch (dim) {
    case 1: return 1024;
    case 2: return 128;
    case 3: return 48;
    default: return 24;
  }
}

inline std::vector<std::size_t> strides(const std::vector<Vec>& axes) {
  std::vector<std::size_t> st(axes.size());
  std::size_t acc = 1;
  for (std::size_t k = axes.size(); k-- > 0;) {
    st[k] = acc;
    acc *= axes[k].size();
  }
  return st;
}

}  // namespace density_detail

// Product-Gaussian kernel density estimate of the weighted law
// q(dx) = E[w 1_dx(X)]: f(x) = (1/n) sum_i w_i prod_k K_h(x_k - X_ik).
// Its full-space integral is mean(w); total_mass reports the grid's share.
inline DensityEstimate weighted_kde(const std::vector<Vec>& samples, const Vec& weights,
                                    Vec bandwidths = {}, int cells_per_axis = 0) {
  const std::size_t n = samples.size();
  if (n < 100) throw OutOfRange("weighted_kde: need at least 100 samples");
  if (weights.size() != n) throw DimensionMismatch("weighted_kde: |weights| != |samples|");
  const int d = static_cast<int>(samples.front().size());
  double wsum = 0.0;
  for (double w : weights) {
    if (w < 0.0) throw OutOfRange("weighted_kde: negative weight");
    wsum += w;
  }
  if (wsum <= 0.0) throw DegenerateSample("weighted_kde: all weights vanish");

  // Silverman-style per-coordinate default bandwidth
  if (bandwidths.empty()) {
    bandwidths.assign(static_cast<std::size_t>(d), 0.0);
    const double factor = std::pow(static_cast<double>(n), -1.0 / (d + 4.0));
    for (int k = 0; k < d; ++k) {
      double m = 0.0, ss = 0.0;
      for (const auto& x : samples) m += x[static_cast<std::size_t>(k)];
      m /= static_cast<double>(n);
      for (const auto& x : samples) {
        const double dv = x[static_cast<std::size_t>(k)] - m;
        ss += dv * dv;
      }
      const double sd = std::sqrt(ss / static_cast<double>(n - 1));
      bandwidths[static_cast<std::size_t>(k)] = sd > 0.0 ? factor * sd : 0.1;
    }
  }
  for (double h : bandwidths)
    if (!(h > 0.0)) throw OutOfRange("weighted_kde: bandwidths must be positive");

  if (cells_per_axis <= 0) cells_per_axis = density_detail::default_cells(d);

  DensityEstimate est;
  est.bandwidths = bandwidths;
  est.spacing.resize(static_cast<std::size_t>(d));
  est.axes.resize(static_cast<std::size_t>(d));
  std::vector<long> origin(static_cast<std::size_t>(d));
  for (int k = 0; k < d; ++k) {
    double lo = std::numeric_limits<double>::infinity(), hi = -lo;
    for (const auto& x : samples) {
      lo = std::min(lo, x[static_cast<std::size_t>(k)]);
      hi = std::max(hi, x[static_cast<std::size_t>(k)]);
    }
    const double h = bandwidths[static_cast<std::size_t>(k)];
    lo -= 4.0 * h;
    hi += 4.0 * h;
    const double s = density_detail::pow2_at_most((hi - lo) / cells_per_axis);
    est.spacing[static_cast<std::size_t>(k)] = s;
    origin[static_cast<std::size_t>(k)] = static_cast<long>(std::floor(lo / s));
    const long last = static_cast<long>(std::ceil(hi / s));
    auto& axis = est.axes[static_cast<std::size_t>(k)];
    for (long i = origin[static_cast<std::size_t>(k)]; i <= last; ++i)
      axis.push_back(static_cast<double>(i) * s);
  }

  const auto st = density_detail::strides(est.axes);
  std::size_t total = 1;
  for (const auto& ax : est.axes) total *= ax.size();
  est.values.assign(total, 0.0);

  // accumulate truncated kernels (8.6 sigma keeps the dropped tail below
  // machine epsilon relative to the kernel peak)
  const double inv_n = 1.0 / static_cast<double>(n);
  std::vector<Vec> kv(static_cast<std::size_t>(d));
  std::vector<std::size_t> lo_idx(static_cast<std::size_t>(d)), len(static_cast<std::size_t>(d));
  constexpr double kInvSqrt2Pi = 0.3989422804014326779399461;
  for (std::size_t i = 0; i < n; ++i) {
    const double w = weights[i] * inv_n;
    if (w == 0.0) continue;
    bool skip = false;
    for (int k = 0; k < d; ++k) {
      const double h = bandwidths[static_cast<std::size_t>(k)];
      const double xk = samples[i][static_cast<std::size_t>(k)];
      const auto& axis = est.axes[static_cast<std::size_t>(k)];
      const double s = est.spacing[static_cast<std::size_t>(k)];
      const double reach = 8.6 * h;
      long a = static_cast<long>(std::ceil((xk - reach) / s)) - origin[static_cast<std::size_t>(k)];
      long b = static_cast<long>(std::floor((xk + reach) / s)) - origin[static_cast<std::size_t>(k)];
      a = std::max<long>(a, 0);
      b = std::min<long>(b, static_cast<long>(axis.size()) - 1);
      if (b < a) {
        skip = true;
        break;
      }
      lo_idx[static_cast<std::size_t>(k)] = static_cast<std::size_t>(a);
      len[static_cast<std::size_t>(k)] = static_cast<std::size_t>(b - a + 1);
      auto& col = kv[static_cast<std::size_t>(k)];
      col.assign(len[static_cast<std::size_t>(k)], 0.0);
      for (std::size_t q = 0; q < col.size(); ++q) {
        const double u = (axis[static_cast<std::size_t>(a) + q] - xk) / h;
        col[q] = kInvSqrt2Pi * std::exp(-0.5 * u * u) / h;
      }
    }
    if (skip) continue;
    // tensor accumulation over the truncated window
    std::vector<std::size_t> idx(static_cast<std::size_t>(d), 0);
    for (;;) {
      double prod = w;
      std::size_t flat = 0;
      for (int k = 0; k < d; ++k) {
        prod *= kv[static_cast<std::size_t>(k)][idx[static_cast<std::size_t>(k)]];
        flat += (lo_idx[static_cast<std::size_t>(k)] + idx[static_cast<std::size_t>(k)]) *
                st[static_cast<std::size_t>(k)];
      }
      est.values[flat] += prod;
      int k = d - 1;
      for (; k >= 0; --k) {
        if (++idx[static_cast<std::size_t>(k)] < len[static_cast<std::size_t>(k)]) break;
        idx[static_cast<std::size_t>(k)] = 0;
      }
      if (k < 0) break;
    }
  }

  est.total_mass = 0.0;
  for (double v : est.values) est.total_mass += v;
  est.total_mass *= est.cell_volume();
  return est;
}

// Evaluates an analytic density on a dyadic-aligned grid over [lo, hi]; used
// by tests and by the exact-path Besov fixtures.
inline DensityEstimate density_from_function(const std::function<double(const Vec&)>& f,
                                             const Vec& lo, const Vec& hi, int cells_per_axis) {
  const int d = static_cast<int>(lo.size());
  DensityEstimate est;
  est.spacing.resize(static_cast<std::size_t>(d));
  est.axes.resize(static_cast<std::size_t>(d));
  for (int k = 0; k < d; ++k) {
    const double s = density_detail::pow2_at_most((hi[static_cast<std::size_t>(k)] -
                                                   lo[static_cast<std::size_t>(k)]) /
                                                  cells_per_axis);
    est.spacing[static_cast<std::size_t>(k)] = s;
    const long a = static_cast<long>(std::floor(lo[static_cast<std::size_t>(k)] / s));
    const long b = static_cast<long>(std::ceil(hi[static_cast<std::size_t>(k)] / s));
    for (long i = a; i <= b; ++i)
      est.axes[static_cast<std::size_t>(k)].push_back(static_cast<double>(i) * s);
  }
  const auto st = density_detail::strides(est.axes);
  std::size_t total = 1;
  for (const auto& ax : est.axes) total *= ax.size();
  est.values.assign(total, 0.0);
  Vec x(static_cast<std::size_t>(d));
  for (std::size_t flat = 0; flat < total; ++flat) {
    std::size_t rem = flat;
    for (int k = 0; k < d; ++k) {
      const std::size_t i = rem / st[static_cast<std::size_t>(k)];
      rem %= st[static_cast<std::size_t>(k)];
      x[static_cast<std::size_t>(k)] = est.axes[static_cast<std::size_t>(k)][i];
    }
    est.values[flat] = f(x);
  }
  est.total_mass = 0.0;
  for (double v : est.values) est.total_mass += v;
  est.total_mass *= est.cell_volume();
  return est;
}

// ---------------------------------------------------------------------------
// Anisotropic Besov norm  ||f||_L1 + sum_k sup_h |h|^{-lambda/a_k} ||Δ_{h e_k} f||_L1
// ---------------------------------------------------------------------------

struct BesovReport {
  double lambda = 0.0;
  Anisotropy a;
  double l1_norm = 0.0;
  Vec h_values;                // the h grid actually used (signed)
  std::vector<Vec> modulus;    // [k][h index]: |h|^{-lambda/a_k} ||Δ_{h e_k} f||_L1
  double norm_value = 0.0;
  bool stabilized = false;
};

inline Vec dyadic_h_grid(int depth) {
  Vec h;
  for (int m = 0; m <= depth; ++m) {
    const double v = std::pow(2.0, -m);
    h.push_back(v);
    h.push_back(-v);
  }
  return h;
}

namespace density_detail {

// ||Δ_{h e_k} f||_L1 on the grid with zero padding outside the box;
// h must be a whole number of cells.
inline double l1_difference(const DensityEstimate& f, int axis, long shift_cells,
                            const std::vector<std::size_t>& st) {
  const long nk = static_cast<long>(f.axes[static_cast<std::size_t>(axis)].size());
  std::size_t outer = 1;
  for (int k = 0; k < f.dim(); ++k)
    if (k != axis) outer *= f.axes[static_cast<std::size_t>(k)].size();
  const double cellvol = f.cell_volume();
  double acc = 0.0;
  // iterate all nodes of the other axes, then the extended index range on `axis`
  for (std::size_t o = 0; o < outer; ++o) {
    std::size_t rem = o, base = 0;
    for (int k = 0; k < f.dim(); ++k) {
      if (k == axis) continue;
      const std::size_t nk2 = f.axes[static_cast<std::size_t>(k)].size();
      const std::size_t ik = rem % nk2;
      rem /= nk2;
      base += ik * st[static_cast<std::size_t>(k)];
    }
    const std::size_t sa = st[static_cast<std::size_t>(axis)];
    const long lo = std::min<long>(0, -shift_cells);
    const long hi = std::max<long>(nk - 1, nk - 1 - shift_cells);
    for (long i = lo; i <= hi; ++i) {
      const long is = i + shift_cells;
      const double fi =
          (i >= 0 && i < nk) ? f.values[base + static_cast<std::size_t>(i) * sa] : 0.0;
      const double fs =
          (is >= 0 && is < nk) ? f.values[base + static_cast<std::size_t>(is) * sa] : 0.0;
      acc += std::abs(fs - fi);
    }
  }
  return acc * cellvol;
}

}  // namespace density_detail

// Grid path: discrete sup over h_grid, differences by whole-cell shifts with
// zero padding. Stabilized when no modulus column still grows between the two
// smallest |h| levels (5% slack).
inline BesovReport besov_norm(const DensityEstimate& f, double lambda, const Anisotropy& a,
                              const Vec& h_grid) {
  const int d = f.dim();
  if (static_cast<int>(a.a.size()) != d) throw DimensionMismatch("besov_norm: anisotropy size");
  for (double ak : a.a)
    if (!(lambda / ak > 0.0 && lambda / ak < 1.0))
      throw OutOfRange("besov_norm: lambda/a_k must lie in (0,1)");
  BesovReport rep;
  rep.lambda = lambda;
  rep.a = a;
  rep.h_values = h_grid;

  const auto st = density_detail::strides(f.axes);
  rep.l1_norm = 0.0;
  for (double v : f.values) rep.l1_norm += std::abs(v);
  rep.l1_norm *= f.cell_volume();

  rep.modulus.assign(static_cast<std::size_t>(d), Vec(h_grid.size(), 0.0));
  for (int k = 0; k < d; ++k) {
    const double s = f.spacing[static_cast<std::size_t>(k)];
    for (std::size_t hi = 0; hi < h_grid.size(); ++hi) {
      const double h = h_grid[hi];
      if (std::abs(h) > 1.0) throw OutOfRange("besov_norm: |h| must be <= 1");
      const double cells = h / s;
      const long shift = std::lround(cells);
      if (shift == 0 || std::abs(cells - static_cast<double>(shift)) > 1e-9)
        throw GridTooCoarse("besov_norm: |h| below/off the grid spacing of axis " +
                            std::to_string(k + 1));
      const double l1 = density_detail::l1_difference(f, k, shift, st);
      rep.modulus[static_cast<std::size_t>(k)][hi] =
          std::pow(std::abs(h), -lambda / a.a[static_cast<std::size_t>(k)]) * l1;
    }
  }

  rep.norm_value = rep.l1_norm;
  for (int k = 0; k < d; ++k) {
    double mx = 0.0;
    for (double m : rep.modulus[static_cast<std::size_t>(k)]) mx = std::max(mx, m);
    rep.norm_value += mx;
  }

  // stabilization: compare the two smallest |h| levels per coordinate
  Vec levels;
  for (double h : h_grid) {
    const double ah = std::abs(h);
    bool seen = false;
    for (double l : levels) seen = seen || std::abs(l - ah) < 1e-15;
    if (!seen) levels.push_back(ah);
  }
  std::sort(levels.begin(), levels.end());
  if (levels.size() < 2) {
    rep.stabilized = false;
  } else {
    rep.stabilized = true;
    for (int k = 0; k < d && rep.stabilized; ++k) {
      const auto level_value = [&](double lev) {
        double v = 0.0;
        for (std::size_t hi = 0; hi < h_grid.size(); ++hi)
          if (std::abs(std::abs(h_grid[hi]) - lev) < 1e-15)
            v = std::max(v, rep.modulus[static_cast<std::size_t>(k)][hi]);
        return v;
      };
      const double smallest = level_value(levels[0]);
      const double second = level_value(levels[1]);
      if (smallest > 1.05 * second) rep.stabilized = false;
    }
  }
  return rep;
}

// Exact-evaluation path for d = 1: L1 norms by adaptive quadrature on
// [lo - 2, hi + 2] (f must be negligible outside [lo, hi]).
inline BesovReport besov_norm_1d(const std::function<double(double)>& f, double lo, double hi,
                                 double lambda, const Vec& h_grid, double tol = 1e-11) {
  if (!(lambda > 0.0 && lambda < 1.0)) throw OutOfRange("besov_norm_1d: lambda in (0,1)");
  BesovReport rep;
  rep.lambda = lambda;
  rep.a.a = {1.0};
  rep.a.mean_alpha = 1.0;
  rep.h_values = h_grid;
  rep.l1_norm = quad::adaptive_simpson([&](double x) { return std::abs(f(x)); }, lo - 1.0,
                                       hi + 1.0, tol);
  rep.modulus.assign(1, Vec(h_grid.size(), 0.0));
  for (std::size_t i = 0; i < h_grid.size(); ++i) {
    const double h = h_grid[i];
    if (std::abs(h) > 1.0) throw OutOfRange("besov_norm_1d: |h| must be <= 1");
    const double l1 = quad::adaptive_simpson(
        [&](double x) { return std::abs(f(x + h) - f(x)); }, lo - 2.0, hi + 2.0, tol);
    rep.modulus[0][i] = std::pow(std::abs(h), -lambda) * l1;
  }
  rep.norm_value = rep.l1_norm;
  double mx = 0.0;
  for (double m : rep.modulus[0]) mx = std::max(mx, m);
  rep.norm_value += mx;
  rep.stabilized = true;
  return rep;
}

}  // namespace cbi
