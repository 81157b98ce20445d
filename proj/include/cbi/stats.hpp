#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <vector>

#include "cbi/errors.hpp"
#include "cbi/rng.hpp"
#include "cbi/vecmat.hpp"

namespace cbi {

struct MeanStderr {
  double mean = 0.0;
  double stderr_ = 0.0;
  std::size_t n = 0;
};

inline MeanStderr mean_stderr(const Vec& xs) {
  MeanStderr r;
  r.n = xs.size();
  if (r.n == 0) return r;
  double s = 0.0;
  for (double x : xs) s += x;
  r.mean = s / static_cast<double>(r.n);
  if (r.n < 2) return r;
  double ss = 0.0;
  for (double x : xs) {
    const double d = x - r.mean;
    ss += d * d;
  }
  r.stderr_ = std::sqrt(ss / (static_cast<double>(r.n) * (static_cast<double>(r.n) - 1.0)));
  return r;
}

struct LineFit {
  double slope = 0.0;
  double intercept = 0.0;
  double slope_stderr = 0.0;
};

// Ordinary least squares y = a + b x; slope_stderr from the residual variance.
inline LineFit linear_fit(const Vec& xs, const Vec& ys) {
  const std::size_t n = xs.size();
  if (n != ys.size() || n < 2) throw OutOfRange("linear_fit: need matched n >= 2");
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    mx += xs[i];
    my += ys[i];
  }
  mx /= static_cast<double>(n);
  my /= static_cast<double>(n);
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sxx += (xs[i] - mx) * (xs[i] - mx);
    sxy += (xs[i] - mx) * (ys[i] - my);
  }
  if (sxx == 0.0) throw OutOfRange("linear_fit: degenerate abscissae");
  LineFit f;
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  if (n > 2) {
    double rss = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double r = ys[i] - (f.intercept + f.slope * xs[i]);
      rss += r * r;
    }
    f.slope_stderr = std::sqrt(rss / (static_cast<double>(n) - 2.0) / sxx);
  }
  return f;
}

namespace detail {

// Regularized lower incomplete gamma P(a,x) by series (x < a+1) or
// continued fraction (x >= a+1); classic Lentz / power-series split.
inline double gamma_p(double a, double x) {
  if (x < 0.0 || a <= 0.0) throw OutOfRange("gamma_p: bad arguments");
  if (x == 0.0) return 0.0;
  const double gln = std::lgamma(a);
  if (x < a + 1.0) {
    double ap = a, sum = 1.0 / a, del = sum;
    for (int i = 0; i < 500; ++i) {
      ap += 1.0;
      del *= x / ap;
      sum += del;
      if (std::abs(del) < std::abs(sum) * 1e-15) break;
    }
    return sum * std::exp(-x + a * std::log(x) - gln);
  }
  double b = x + 1.0 - a, c = 1e300, d = 1.0 / b, h = d;
  for (int i = 1; i < 500; ++i) {
    const double an = -static_cast<double>(i) * (static_cast<double>(i) - a);
    b += 2.0;
    d = an * d + b;
    if (std::abs(d) < 1e-300) d = 1e-300;
    c = b + an / c;
    if (std::abs(c) < 1e-300) c = 1e-300;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::abs(del - 1.0) < 1e-15) break;
  }
  return 1.0 - std::exp(-x + a * std::log(x) - gln) * h;
}

}  // namespace detail

// Upper tail of the chi-square distribution with `dof` degrees of freedom.
inline double chi_square_pvalue(double stat, double dof) {
  if (stat <= 0.0) return 1.0;
  return 1.0 - detail::gamma_p(0.5 * dof, 0.5 * stat);
}

struct ChiSquareResult {
  double statistic = 0.0;
  double dof = 0.0;
  double p_value = 1.0;
};

// Pearson goodness-of-fit of observed counts against expected counts.
// Bins with expected < 5 are pooled into their neighbor (standard practice).
inline ChiSquareResult chi_square_gof(const std::vector<double>& observed,
                                      const std::vector<double>& expected) {
  if (observed.size() != expected.size() || observed.empty())
    throw OutOfRange("chi_square_gof: mismatched bins");
  std::vector<double> obs, exp;
  double o_acc = 0.0, e_acc = 0.0;
  for (std::size_t i = 0; i < observed.size(); ++i) {
    o_acc += observed[i];
    e_acc += expected[i];
    if (e_acc >= 5.0) {
      obs.push_back(o_acc);
      exp.push_back(e_acc);
      o_acc = e_acc = 0.0;
    }
  }
  if (e_acc > 0.0) {
    if (exp.empty()) {
      obs.push_back(o_acc);
      exp.push_back(e_acc);
    } else {
      obs.back() += o_acc;
      exp.back() += e_acc;
    }
  }
  ChiSquareResult r;
  if (exp.size() < 2) {
    r.dof = 0;
    r.p_value = 1.0;
    return r;
  }
  for (std::size_t i = 0; i < exp.size(); ++i) {
    const double d = obs[i] - exp[i];
    r.statistic += d * d / exp[i];
  }
  r.dof = static_cast<double>(exp.size() - 1);
  r.p_value = chi_square_pvalue(r.statistic, r.dof);
  return r;
}

// Bootstrap standard error of a statistic computed from per-path samples.
// `stat` maps a resampled index set to the statistic value.
inline double bootstrap_stderr(std::size_t n, std::size_t n_boot, std::uint64_t seed,
                               const std::function<double(const std::vector<std::size_t>&)>& stat) {
  if (n == 0 || n_boot < 2) throw OutOfRange("bootstrap_stderr: need data");
  Vec vals;
  vals.reserve(n_boot);
  std::vector<std::size_t> idx(n);
  for (std::size_t b = 0; b < n_boot; ++b) {
    RngStream rng(seed, b, 0, 0xB005u);
    for (std::size_t i = 0; i < n; ++i)
      idx[i] = static_cast<std::size_t>(rng.next_u64() % n);
    vals.push_back(stat(idx));
  }
  const MeanStderr ms = mean_stderr(vals);
  return ms.stderr_ * std::sqrt(static_cast<double>(n_boot));  // sample std of bootstrap stats
}

}  // namespace cbi
