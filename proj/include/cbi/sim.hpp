#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <functional>
#include <limits>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "cbi/errors.hpp"
#include "cbi/levy.hpp"
#include "cbi/params.hpp"
#include "cbi/rng.hpp"
#include "cbi/stats.hpp"
#include "cbi/vecmat.hpp"

namespace cbi {

struct SchemeConfig {
  double dt = 1e-3;
  double delta = 0.05;  // small-jump cutoff in (0,1)
  std::int64_t n_paths = 1;
  std::uint64_t seed = 1;
  bool record_skeleton = false;
  int skeleton_stride = 1;
  bool record_jump_counts = false;
  int threads = 0;  // 0: hardware, capped by CBI_LAB_THREADS
};

// Magnitudes of what the dt/delta truncation leaves out. The below-delta
// immigration is replaced by its exact mean drift, so its residual bias is
// zero and only the magnitude is reported; the dropped compensated branching
// shell is mean-zero with the reported L2 proxy per coordinate.
struct BiasReport {
  double immigration_small_drift = 0.0;  // t * |∫_{|z|<=delta} z nu(dz)|
  double immigration_residual = 0.0;     // zero by construction
  Vec branching_l2_proxy;                // per j: ∫_{|z|<=delta} |z|^2 mu_j(dz)
};

// Terminal states (and optional skeletons) of n_paths simulated paths.
// Path i is fully determined by (seed, i, config): that pair is the seed
// provenance of every draw the path consumed.
struct PathEnsemble {
  int dim = 0;
  std::uint64_t seed = 0;
  std::vector<Vec> terminal;
  Vec weights;
  Vec skeleton_times;
  std::vector<std::vector<Vec>> skeleton;  // [path][frame]
  std::vector<std::uint64_t> branching_jump_counts;
  BiasReport bias;
};

namespace sim_detail {

// RNG source ids; the stream key is (seed, path, step, source).
enum Source : std::uint64_t {
  kDiffusion = 0,
  kImmigrationShell = 1,
  kImmigrationTail = 2,
  kInitialState = 3,
  kBranchingBase = 8,  // shell j at kBranchingBase + 2j, tail at +2j+1
};

inline int resolve_threads(int requested, std::int64_t n_paths) {
  int t = requested;
  if (t <= 0) {
    t = static_cast<int>(std::thread::hardware_concurrency());
    if (const char* env = std::getenv("CBI_LAB_THREADS")) {
      const int cap = std::atoi(env);
      if (cap > 0) t = std::min(t, cap);
    }
  }
  t = std::max(1, t);
  return static_cast<int>(std::min<std::int64_t>(t, std::max<std::int64_t>(1, n_paths)));
}

// Shared per-run tables: effective drift, truncation compensators, samplers.
struct Engine {
  const AdmissibleParams& p;
  int d;
  double dt;
  long n_steps;
  std::uint64_t seed;
  double delta;

  Mat bt;
  Vec nu_small_drift;  // ∫_{|z|<=delta} z nu(dz), applied as drift
  RestrictedSampler nu_shell, nu_tail;
  std::vector<RestrictedSampler> mu_shell, mu_tail;
  std::vector<Vec> comp;  // per j: ∫_{delta<|z|<=1} z mu_j(dz)

  Engine(const AdmissibleParams& params, double t, const SchemeConfig& cfg)
      : p(params), d(params.dim()), seed(cfg.seed), delta(cfg.delta) {
    if (!(t > 0.0)) throw OutOfRange("simulate: need t > 0");
    if (!(cfg.dt > 0.0) || cfg.dt > 1.0) throw OutOfRange("simulate: need dt in (0,1]");
    if (!(cfg.delta > 0.0) || !(cfg.delta < 1.0))
      throw OutOfRange("simulate: need delta in (0,1)");
    n_steps = std::max<long>(1, static_cast<long>(std::ceil(t / cfg.dt - 1e-12)));
    dt = t / static_cast<double>(n_steps);

    bt = effective_drift(p);
    nu_small_drift = small_jump_drift(p.nu, d, 0.0, delta);
    nu_shell = RestrictedSampler(p.nu, d, Region::shell(delta, 1.0));
    nu_tail = RestrictedSampler(p.nu, d, Region::tail(1.0));
    mu_shell.reserve(static_cast<std::size_t>(d));
    mu_tail.reserve(static_cast<std::size_t>(d));
    comp.reserve(static_cast<std::size_t>(d));
    for (int j = 0; j < d; ++j) {
      const auto& mu_j = p.mu[static_cast<std::size_t>(j)];
      mu_shell.emplace_back(mu_j, d, Region::shell(delta, 1.0));
      mu_tail.emplace_back(mu_j, d, Region::tail(1.0));
      comp.push_back(small_jump_drift(mu_j, d, delta, 1.0));
    }
  }

  Vec initial_state(const Vec& x0, const std::function<Vec(RngStream&)>& sampler,
                    std::uint64_t path) const {
    if (sampler) {
      RngStream rng(seed, path, 0xFFFFFFFFull, kInitialState);
      Vec x = sampler(rng);
      if (x.size() != static_cast<std::size_t>(d))
        throw DimensionMismatch("initial sampler returned wrong dimension");
      return x;
    }
    return x0;
  }

  // One Euler step from `x` at absolute step index `k`; all increments are
  // evaluated at the left endpoint and the result is projected onto the
  // orthant. Returns the number of accepted branching events.
  std::uint64_t step(Vec& x, std::uint64_t path, long k) const {
    Vec next = x;
    // drift: beta + Bt x + below-delta immigration mean
    for (int i = 0; i < d; ++i) {
      double drift = p.beta[static_cast<std::size_t>(i)] + nu_small_drift[static_cast<std::size_t>(i)];
      for (int j = 0; j < d; ++j)
        drift += bt(static_cast<std::size_t>(i), static_cast<std::size_t>(j)) *
                 x[static_cast<std::size_t>(j)];
      next[static_cast<std::size_t>(i)] += dt * drift;
    }
    // diffusion
    {
      RngStream rng(seed, path, static_cast<std::uint64_t>(k), kDiffusion);
      const double sq_dt = std::sqrt(dt);
      for (int i = 0; i < d; ++i) {
        const double ci = p.c[static_cast<std::size_t>(i)];
        if (ci <= 0.0) continue;
        const double xi = std::max(x[static_cast<std::size_t>(i)], 0.0);
        next[static_cast<std::size_t>(i)] += std::sqrt(2.0 * ci * xi) * sq_dt * rng.normal();
      }
    }
    // immigration jumps above delta
    if (!nu_shell.empty()) {
      RngStream rng(seed, path, static_cast<std::uint64_t>(k), kImmigrationShell);
      const std::uint64_t n = rng.poisson(nu_shell.mass() * dt);
      for (std::uint64_t e = 0; e < n; ++e) axpy(next, 1.0, nu_shell.sample(rng));
    }
    if (!nu_tail.empty()) {
      RngStream rng(seed, path, static_cast<std::uint64_t>(k), kImmigrationTail);
      const std::uint64_t n = rng.poisson(nu_tail.mass() * dt);
      for (std::uint64_t e = 0; e < n; ++e) axpy(next, 1.0, nu_tail.sample(rng));
    }
    // branching jumps thinned at the left-endpoint state
    std::uint64_t events = 0;
    for (int j = 0; j < d; ++j) {
      const double xj = std::max(x[static_cast<std::size_t>(j)], 0.0);
      if (xj <= 0.0) continue;
      const auto& shell = mu_shell[static_cast<std::size_t>(j)];
      if (!shell.empty()) {
        RngStream rng(seed, path, static_cast<std::uint64_t>(k),
                      kBranchingBase + 2 * static_cast<std::uint64_t>(j));
        const std::uint64_t n = rng.poisson(xj * shell.mass() * dt);
        for (std::uint64_t e = 0; e < n; ++e) axpy(next, 1.0, shell.sample(rng));
        events += n;
        axpy(next, -xj * dt, comp[static_cast<std::size_t>(j)]);
      }
      const auto& tail = mu_tail[static_cast<std::size_t>(j)];
      if (!tail.empty()) {
        RngStream rng(seed, path, static_cast<std::uint64_t>(k),
                      kBranchingBase + 2 * static_cast<std::uint64_t>(j) + 1);
        const std::uint64_t n = rng.poisson(xj * tail.mass() * dt);
        for (std::uint64_t e = 0; e < n; ++e) axpy(next, 1.0, tail.sample(rng));
        events += n;
      }
    }
    // full truncation: project onto the orthant
    for (int i = 0; i < d; ++i) {
      double& v = next[static_cast<std::size_t>(i)];
      if (!std::isfinite(v))
        throw NonFiniteState("simulate: non-finite state at step " + std::to_string(k) +
                             ", path " + std::to_string(path));
      v = std::max(v, 0.0);
    }
    x = std::move(next);
    return events;
  }

  BiasReport bias_report(double t) const {
    BiasReport b;
    b.immigration_small_drift = t * norm2(nu_small_drift);
    b.immigration_residual = 0.0;
    b.branching_l2_proxy.resize(static_cast<std::size_t>(d), 0.0);
    for (int j = 0; j < d; ++j) {
      const Moment m =
          levy_moment(p.mu[static_cast<std::size_t>(j)], d, 2.0, Region::ball(delta));
      b.branching_l2_proxy[static_cast<std::size_t>(j)] =
          m.divergent ? std::numeric_limits<double>::infinity() : m.value;
    }
    return b;
  }
};

// Runs `body(path)` over [0, n) on the resolved number of lanes, propagating
// the first exception. Each path writes only its own slots, so the result is
// identical for any lane count.
inline void parallel_paths(std::int64_t n, int threads,
                           const std::function<void(std::int64_t)>& body) {
  if (threads <= 1) {
    for (std::int64_t i = 0; i < n; ++i) body(i);
    return;
  }
  std::atomic<std::int64_t> next{0};
  std::vector<std::thread> pool;
  std::exception_ptr err;
  std::mutex err_mx;
  for (int w = 0; w < threads; ++w) {
    pool.emplace_back([&] {
      try {
        for (;;) {
          const std::int64_t i = next.fetch_add(1);
          if (i >= n) break;
          body(i);
        }
      } catch (...) {
        std::lock_guard<std::mutex> lock(err_mx);
        if (!err) err = std::current_exception();
      }
    });
  }
  for (auto& th : pool) th.join();
  if (err) std::rethrow_exception(err);
}

}  // namespace sim_detail

// Full-truncation Euler scheme for the CBI SDE with Poisson thinning of the
// branching jumps. `x0_sampler`, when set, overrides the point initial state.
inline PathEnsemble simulate(const AdmissibleParams& p, const Vec& x0, double t,
                             const SchemeConfig& cfg,
                             const std::function<Vec(RngStream&)>& x0_sampler = nullptr) {
  {
    const ValidationReport rep = validate(p);
    if (!rep.ok)
      throw InvalidParams("simulate: parameters are not admissible (" +
                          rep.violations.front().condition + ": " +
                          rep.violations.front().message + ")");
  }
  if (!x0_sampler && x0.size() != static_cast<std::size_t>(p.dim()))
    throw DimensionMismatch("simulate: x0 has wrong dimension");
  const sim_detail::Engine eng(p, t, cfg);

  PathEnsemble ens;
  ens.dim = eng.d;
  ens.seed = cfg.seed;
  ens.terminal.assign(static_cast<std::size_t>(cfg.n_paths), Vec());
  ens.weights.assign(static_cast<std::size_t>(cfg.n_paths), 1.0);
  const bool count_jumps = cfg.record_jump_counts;
  if (count_jumps) ens.branching_jump_counts.assign(static_cast<std::size_t>(cfg.n_paths), 0);

  long frames = 0;
  if (cfg.record_skeleton) {
    const int stride = std::max(1, cfg.skeleton_stride);
    for (long k = stride; k <= eng.n_steps; k += stride) {
      ens.skeleton_times.push_back(static_cast<double>(k) * eng.dt);
      ++frames;
    }
    ens.skeleton.assign(static_cast<std::size_t>(cfg.n_paths), std::vector<Vec>());
  }

  const int threads = sim_detail::resolve_threads(cfg.threads, cfg.n_paths);
  sim_detail::parallel_paths(cfg.n_paths, threads, [&](std::int64_t path) {
    Vec x = eng.initial_state(x0, x0_sampler, static_cast<std::uint64_t>(path));
    std::uint64_t events = 0;
    std::vector<Vec>* skel = cfg.record_skeleton ? &ens.skeleton[static_cast<std::size_t>(path)]
                                                 : nullptr;
    if (skel) skel->reserve(static_cast<std::size_t>(frames));
    const int stride = std::max(1, cfg.skeleton_stride);
    for (long k = 0; k < eng.n_steps; ++k) {
      events += eng.step(x, static_cast<std::uint64_t>(path), k);
      if (skel && (k + 1) % stride == 0) skel->push_back(x);
    }
    ens.terminal[static_cast<std::size_t>(path)] = std::move(x);
    if (count_jumps) ens.branching_jump_counts[static_cast<std::size_t>(path)] = events;
  });

  ens.bias = eng.bias_report(t);
  return ens;
}

// ---------------------------------------------------------------------------
// One-step approximation X^eps = U^eps + V^eps with coefficients frozen at
// X(t - eps), coupled to the exact scheme through shared candidate draws.
// ---------------------------------------------------------------------------

struct OneStepApprox {
  Vec u;       // frozen drift + frozen big branching jumps
  Vec v;       // frozen diffusion + compensated small branching + immigration
  Vec x_eps;   // u + v
  Vec x_true;  // the scheme's own state at t, same noise
};

namespace sim_detail {

// Advances the window (t-eps, t] once, evolving the true scheme and the
// frozen-coefficient approximation from the same Poisson candidates (thinning
// against a shared dominating intensity) and the same Brownian increments.
inline OneStepApprox window_approx(const Engine& eng, Vec x_start, long k_begin, long k_end,
                                   std::uint64_t path) {
  const int d = eng.d;
  const double dt = eng.dt;
  const double eps = static_cast<double>(k_end - k_begin) * dt;
  const Vec frozen = x_start;

  Vec frozen_pos(frozen.size());
  for (std::size_t i = 0; i < frozen.size(); ++i) frozen_pos[i] = std::max(frozen[i], 0.0);

  // U: frozen drift (beta + Bt x; the below-delta immigration mean is booked
  // under V with the other finite-variation terms) + frozen big jumps.
  Vec u = frozen;
  for (int i = 0; i < d; ++i) {
    double drift = eng.p.beta[static_cast<std::size_t>(i)];
    for (int j = 0; j < d; ++j)
      drift += eng.bt(static_cast<std::size_t>(i), static_cast<std::size_t>(j)) *
               frozen[static_cast<std::size_t>(j)];
    u[static_cast<std::size_t>(i)] += eps * drift;
  }
  Vec v(static_cast<std::size_t>(d), 0.0);
  axpy(v, eps, eng.nu_small_drift);

  Vec x = std::move(x_start);
  const double sq_dt = std::sqrt(dt);

  for (long k = k_begin; k < k_end; ++k) {
    Vec next = x;
    for (int i = 0; i < d; ++i) {
      double drift = eng.p.beta[static_cast<std::size_t>(i)] +
                     eng.nu_small_drift[static_cast<std::size_t>(i)];
      for (int j = 0; j < d; ++j)
        drift += eng.bt(static_cast<std::size_t>(i), static_cast<std::size_t>(j)) *
                 x[static_cast<std::size_t>(j)];
      next[static_cast<std::size_t>(i)] += dt * drift;
    }
    {
      RngStream rng(eng.seed, path, static_cast<std::uint64_t>(k), kDiffusion);
      for (int i = 0; i < d; ++i) {
        const double ci = eng.p.c[static_cast<std::size_t>(i)];
        if (ci <= 0.0) continue;
        const double dw = sq_dt * rng.normal();
        next[static_cast<std::size_t>(i)] +=
            std::sqrt(2.0 * ci * std::max(x[static_cast<std::size_t>(i)], 0.0)) * dw;
        v[static_cast<std::size_t>(i)] +=
            std::sqrt(2.0 * ci * frozen_pos[static_cast<std::size_t>(i)]) * dw;
      }
    }
    if (!eng.nu_shell.empty()) {
      RngStream rng(eng.seed, path, static_cast<std::uint64_t>(k), kImmigrationShell);
      const std::uint64_t n = rng.poisson(eng.nu_shell.mass() * dt);
      for (std::uint64_t e = 0; e < n; ++e) {
        const Vec z = eng.nu_shell.sample(rng);
        axpy(next, 1.0, z);
        axpy(v, 1.0, z);
      }
    }
    if (!eng.nu_tail.empty()) {
      RngStream rng(eng.seed, path, static_cast<std::uint64_t>(k), kImmigrationTail);
      const std::uint64_t n = rng.poisson(eng.nu_tail.mass() * dt);
      for (std::uint64_t e = 0; e < n; ++e) {
        const Vec z = eng.nu_tail.sample(rng);
        axpy(next, 1.0, z);
        axpy(v, 1.0, z);
      }
    }
    for (int j = 0; j < d; ++j) {
      const double xj = std::max(x[static_cast<std::size_t>(j)], 0.0);
      const double fj = frozen_pos[static_cast<std::size_t>(j)];
      const double dom = std::max(xj, fj);
      const auto& shell = eng.mu_shell[static_cast<std::size_t>(j)];
      if (!shell.empty() && dom > 0.0) {
        RngStream rng(eng.seed, path, static_cast<std::uint64_t>(k),
                      kBranchingBase + 2 * static_cast<std::uint64_t>(j));
        const std::uint64_t n = rng.poisson(dom * shell.mass() * dt);
        for (std::uint64_t e = 0; e < n; ++e) {
          const double mark = rng.uniform() * dom;
          const Vec z = shell.sample(rng);
          if (mark <= xj) axpy(next, 1.0, z);
          if (mark <= fj) axpy(v, 1.0, z);
        }
      }
      if (!shell.empty()) axpy(next, -xj * dt, eng.comp[static_cast<std::size_t>(j)]);
      const auto& tail = eng.mu_tail[static_cast<std::size_t>(j)];
      if (!tail.empty() && dom > 0.0) {
        RngStream rng(eng.seed, path, static_cast<std::uint64_t>(k),
                      kBranchingBase + 2 * static_cast<std::uint64_t>(j) + 1);
        const std::uint64_t n = rng.poisson(dom * tail.mass() * dt);
        for (std::uint64_t e = 0; e < n; ++e) {
          const double mark = rng.uniform() * dom;
          const Vec z = tail.sample(rng);
          if (mark <= xj) axpy(next, 1.0, z);
          if (mark <= fj) axpy(u, 1.0, z);
        }
      }
    }
    for (int i = 0; i < d; ++i) {
      double& val = next[static_cast<std::size_t>(i)];
      if (!std::isfinite(val)) throw NonFiniteState("window_approx: non-finite state");
      val = std::max(val, 0.0);
    }
    x = std::move(next);
  }
  // frozen compensator of the small branching shell over the whole window
  for (int j = 0; j < d; ++j)
    if (!eng.mu_shell[static_cast<std::size_t>(j)].empty())
      axpy(v, -frozen_pos[static_cast<std::size_t>(j)] * eps,
           eng.comp[static_cast<std::size_t>(j)]);

  OneStepApprox out;
  out.u = std::move(u);
  out.v = std::move(v);
  out.x_eps = out.u;
  for (std::size_t i = 0; i < out.x_eps.size(); ++i) out.x_eps[i] += out.v[i];
  out.x_true = std::move(x);
  return out;
}

}  // namespace sim_detail

// One-step approximation over the window (t-eps, t] starting from the given
// state at t-eps. The window reuses the absolute step keys, so coupling a
// base run with any eps is exact ("same RNG stream").
inline OneStepApprox euler_one_step_approx(const AdmissibleParams& p, const Vec& state_at_t_minus,
                                           double t, double eps, const SchemeConfig& cfg,
                                           std::uint64_t path = 0) {
  if (!(eps > 0.0) || eps > std::min(1.0, t))
    throw OutOfRange("euler_one_step_approx: need eps in (0, 1 ∧ t]");
  const sim_detail::Engine eng(p, t, cfg);
  const long k_end = eng.n_steps;
  const long window = std::max<long>(1, std::lround(eps / eng.dt));
  const long k_begin = k_end - window;
  if (k_begin < 0) throw OutOfRange("euler_one_step_approx: eps exceeds the horizon");
  return sim_detail::window_approx(eng, state_at_t_minus, k_begin, k_end, path);
}

// Monte Carlo rate experiment for the one-step approximation: for each eps,
// E|X_i(t) - X_i^eps(t)| over fresh coupled paths.
struct OneStepRate {
  Vec eps;
  std::vector<Vec> mean_abs_error;  // [eps][coordinate]
  LineFit fit_max;                  // slope of log max_i E|..| against log eps
};

inline OneStepRate one_step_rate(const AdmissibleParams& p, const Vec& x0, double t,
                                 const Vec& eps_grid, const SchemeConfig& cfg) {
  {
    const ValidationReport rep = validate(p);
    if (!rep.ok) throw InvalidParams("one_step_rate: parameters are not admissible");
  }
  const sim_detail::Engine eng(p, t, cfg);
  OneStepRate out;
  out.eps = eps_grid;
  const int threads = sim_detail::resolve_threads(cfg.threads, cfg.n_paths);
  for (const double eps : eps_grid) {
    const long window = std::max<long>(1, std::lround(eps / eng.dt));
    const long k_begin = eng.n_steps - window;
    if (k_begin < 0) throw OutOfRange("one_step_rate: eps exceeds the horizon");
    std::vector<Vec> diffs(static_cast<std::size_t>(cfg.n_paths));
    sim_detail::parallel_paths(cfg.n_paths, threads, [&](std::int64_t path) {
      Vec x = x0;
      for (long k = 0; k < k_begin; ++k) eng.step(x, static_cast<std::uint64_t>(path), k);
      const OneStepApprox approx =
          sim_detail::window_approx(eng, x, k_begin, eng.n_steps, static_cast<std::uint64_t>(path));
      Vec d(static_cast<std::size_t>(eng.d));
      for (std::size_t i = 0; i < d.size(); ++i)
        d[i] = std::abs(approx.x_true[i] - approx.x_eps[i]);
      diffs[static_cast<std::size_t>(path)] = std::move(d);
    });
    Vec mean(static_cast<std::size_t>(eng.d), 0.0);
    for (const auto& dvec : diffs) axpy(mean, 1.0, dvec);
    for (auto& m : mean) m /= static_cast<double>(cfg.n_paths);
    out.mean_abs_error.push_back(std::move(mean));
  }
  Vec lx, ly;
  for (std::size_t e = 0; e < out.eps.size(); ++e) {
    double mx = 0.0;
    for (double m : out.mean_abs_error[e]) mx = std::max(mx, m);
    lx.push_back(std::log(out.eps[e]));
    ly.push_back(std::log(std::max(mx, 1e-300)));
  }
  out.fit_max = linear_fit(lx, ly);
  return out;
}

// ---------------------------------------------------------------------------
// Time-Hoelder regression: slope of log E|X_i(t) - X_i(t-s)|^eta vs log s.
// ---------------------------------------------------------------------------

struct TimeHolderCoordinate {
  double slope = 0.0;
  double slope_bootstrap_stderr = 0.0;
  double required = 0.0;  // eta / gamma_i minus tolerance
  bool pass = false;
};

struct TimeHolderReport {
  Vec lags;
  std::vector<TimeHolderCoordinate> coordinates;
};

inline TimeHolderReport time_holder_estimate(const AdmissibleParams& p, const Vec& x0, double t,
                                             double eta, const Vec& lags, const SchemeConfig& cfg,
                                             const Vec& gamma, double tolerance = 0.1,
                                             double max_stderr = 0.0) {
  {
    const ValidationReport rep = validate(p);
    if (!rep.ok) throw InvalidParams("time_holder_estimate: parameters are not admissible");
  }
  if (gamma.size() != static_cast<std::size_t>(p.dim()))
    throw DimensionMismatch("time_holder_estimate: gamma per coordinate");
  const sim_detail::Engine eng(p, t, cfg);
  // snap observation times t - s to step indices
  std::vector<long> obs_steps;
  for (const double s : lags) {
    if (!(s > 0.0) || s >= t) throw OutOfRange("time_holder_estimate: lags must be in (0, t)");
    obs_steps.push_back(std::max<long>(0, std::lround((t - s) / eng.dt)));
  }
  const std::size_t n_lags = lags.size();
  const std::size_t n = static_cast<std::size_t>(cfg.n_paths);
  // |X_i(t) - X_i(t-s)|^eta per path, lag, coordinate
  std::vector<Vec> pow_diff(n, Vec(n_lags * static_cast<std::size_t>(eng.d), 0.0));
  const int threads = sim_detail::resolve_threads(cfg.threads, cfg.n_paths);
  sim_detail::parallel_paths(cfg.n_paths, threads, [&](std::int64_t path) {
    Vec x = x0;
    std::vector<Vec> at_obs(n_lags);
    for (long k = 0; k < eng.n_steps; ++k) {
      for (std::size_t l = 0; l < n_lags; ++l)
        if (obs_steps[l] == k) at_obs[l] = x;
      eng.step(x, static_cast<std::uint64_t>(path), k);
    }
    auto& row = pow_diff[static_cast<std::size_t>(path)];
    for (std::size_t l = 0; l < n_lags; ++l)
      for (int i = 0; i < eng.d; ++i)
        row[l * static_cast<std::size_t>(eng.d) + static_cast<std::size_t>(i)] = std::pow(
            std::abs(x[static_cast<std::size_t>(i)] - at_obs[l][static_cast<std::size_t>(i)]),
            eta);
  });

  TimeHolderReport rep;
  rep.lags = lags;
  Vec log_s;
  for (const double s : lags) log_s.push_back(std::log(s));
  for (int i = 0; i < eng.d; ++i) {
    const auto slope_for = [&](const std::vector<std::size_t>& idx) {
      Vec ly;
      for (std::size_t l = 0; l < n_lags; ++l) {
        double m = 0.0;
        for (const std::size_t pi : idx)
          m += pow_diff[pi][l * static_cast<std::size_t>(eng.d) + static_cast<std::size_t>(i)];
        ly.push_back(std::log(std::max(m / static_cast<double>(idx.size()), 1e-300)));
      }
      return linear_fit(log_s, ly).slope;
    };
    std::vector<std::size_t> all(n);
    for (std::size_t k = 0; k < n; ++k) all[k] = k;
    TimeHolderCoordinate c;
    c.slope = slope_for(all);
    c.slope_bootstrap_stderr = bootstrap_stderr(n, 200, cfg.seed ^ 0x5eedULL, slope_for);
    c.required = eta / gamma[static_cast<std::size_t>(i)] - tolerance;
    c.pass = c.slope >= c.required;
    if (max_stderr > 0.0 && c.slope_bootstrap_stderr > max_stderr)
      throw InsufficientPaths("time_holder_estimate: bootstrap stderr above requested tolerance");
    rep.coordinates.push_back(c);
  }
  return rep;
}

}  // namespace cbi
