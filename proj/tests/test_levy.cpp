#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>

#include "cbi/levy.hpp"
#include "cbi/params.hpp"
#include "cbi/rng.hpp"
#include "cbi/stats.hpp"

using namespace cbi;

namespace {

// Test-side quadrature oracle on a log grid: partial sums of ∫ z^{p-1-a} dz
// over [1, R] for growing R; declares divergence when they keep growing.
struct TailOracle {
  double value = 0.0;
  bool divergent = false;
};

TailOracle tail_power_oracle(double p, double a) {
  TailOracle out;
  double prev = 0.0;
  for (int k = 0; k < 40; ++k) {
    const double R = std::pow(10.0, 0.25 * (k + 1));
    const int n = 2000;
    double acc = 0.0;
    for (int i = 0; i < n; ++i) {
      const double za = std::pow(R, double(i) / n), zb = std::pow(R, double(i + 1) / n);
      const auto f = [&](double z) { return std::pow(z, p - 1.0 - a); };
      acc += 0.5 * (f(za) + f(zb)) * (zb - za);
    }
    if (k > 20 && std::abs(acc - prev) < 1e-4 * acc) {
      out.value = acc;
      return out;
    }
    prev = acc;
    if (k == 39) {
      // no plateau after ten decades: still growing means divergent
      out.value = acc;
      out.divergent = true;
    }
  }
  return out;
}

}  // namespace

TEST_CASE("moments of the per-coordinate stable measure") {
  const LevyMeasureSpec trunc{PerCoordinateStable{0, 0.5, true}};
  CHECK(levy_moment(trunc, 1, 1.0, Region::ball(1.0)).value == Catch::Approx(2.0));

  const LevyMeasureSpec untrunc{PerCoordinateStable{0, 1.5, false}};
  const Moment tail1 = levy_moment(untrunc, 1, 1.0, Region::tail(1.0));
  REQUIRE_FALSE(tail1.divergent);
  CHECK(tail1.value == Catch::Approx(2.0));

  // confirmed against the log-grid quadrature oracle
  const TailOracle o1 = tail_power_oracle(1.0, 1.5);
  REQUIRE_FALSE(o1.divergent);
  CHECK(tail1.value == Catch::Approx(o1.value).epsilon(1e-3));

  const Moment tail16 = levy_moment(untrunc, 1, 1.6, Region::tail(1.0));
  CHECK(tail16.divergent);
  CHECK(tail_power_oracle(1.6, 1.5).divergent);
}

TEST_CASE("moments of finite atoms") {
  FiniteAtoms atoms;
  atoms.atoms.push_back({2.0, {2.0, 0.0}});
  const LevyMeasureSpec spec{atoms};
  CHECK(levy_moment(spec, 2, 1.5, Region::tail(1.0)).value ==
        Catch::Approx(2.0 * std::pow(2.0, 1.5)));
  CHECK(levy_moment(spec, 2, 1.5, Region::ball(1.0)).value == 0.0);
  CHECK(levy_mass(spec, 2, Region::all()).value == Catch::Approx(2.0));
  CHECK(levy_coordinate_moment(spec, 2, 0, Region::all()).value == Catch::Approx(4.0));
  CHECK(levy_coordinate_moment(spec, 2, 1, Region::all()).value == 0.0);
}

TEST_CASE("moment is additive over sums and homogeneous in the mass") {
  FiniteAtoms a1;
  a1.atoms.push_back({1.5, {0.3}});
  const LevyMeasureSpec cp{CompoundPoisson{2.0, AxisExponential{0, 0.4}}};
  const LevyMeasureSpec stable{PerCoordinateStable{0, 0.7, true}};
  const LevyMeasureSpec sum = sum_of({LevyMeasureSpec{a1}, cp, stable});

  for (const double p : {0.5, 1.0, 2.0}) {
    const double parts = levy_moment(LevyMeasureSpec{a1}, 1, p, Region::ball(1.0)).value +
                         levy_moment(cp, 1, p, Region::ball(1.0)).value +
                         levy_moment(stable, 1, p, Region::ball(1.0)).value;
    CHECK(levy_moment(sum, 1, p, Region::ball(1.0)).value == Catch::Approx(parts));
  }

  // scaling the mass scales every moment linearly
  FiniteAtoms a2 = a1;
  for (auto& at : a2.atoms) at.mass *= 3.0;
  const LevyMeasureSpec cp3{CompoundPoisson{6.0, AxisExponential{0, 0.4}}};
  for (const double p : {0.5, 1.0, 2.0}) {
    CHECK(levy_moment(LevyMeasureSpec{a2}, 1, p, Region::all()).value ==
          Catch::Approx(3.0 * levy_moment(LevyMeasureSpec{a1}, 1, p, Region::all()).value));
    CHECK(levy_moment(cp3, 1, p, Region::all()).value ==
          Catch::Approx(3.0 * levy_moment(cp, 1, p, Region::all()).value));
  }
}

TEST_CASE("cone geometry constants") {
  using levy_detail::patch_area;
  using levy_detail::patch_first_moment;
  CHECK(patch_area(1) == Catch::Approx(1.0));
  CHECK(patch_area(2) == Catch::Approx(M_PI / 2.0));
  CHECK(patch_first_moment(1) == Catch::Approx(1.0));
  CHECK(patch_first_moment(2) == Catch::Approx(1.0));  // ∫_0^{π/2} cos = 1
  // d=3: octant patch area = 4π/8; ∫ u_1 over it = π/4
  CHECK(patch_area(3) == Catch::Approx(M_PI / 2.0));
  CHECK(patch_first_moment(3) == Catch::Approx(M_PI / 4.0));
}

TEST_CASE("atomic jump sampling matches the thinned Poisson law") {
  FiniteAtoms atoms;
  atoms.atoms.push_back({3.0, {0.4, 0.1}});
  const LevyMeasureSpec spec{atoms};
  const int n = 10000;
  double count = 0.0;
  RngStream rng(11, 0, 0, 0);
  for (int i = 0; i < n; ++i) {
    const JumpBatch b = sample_jumps(spec, 2, Region::ball(1.0), 2.0, 0.5, rng);
    count += static_cast<double>(b.sizes.size());
    for (const auto& z : b.sizes) {
      CHECK(z[0] == 0.4);
      CHECK(z[1] == 0.1);
    }
    REQUIRE(std::is_sorted(b.times.begin(), b.times.end()));
  }
  const double mean = count / n;  // Poisson(2 * 3 * 0.5 = 3)
  CHECK(mean == Catch::Approx(3.0).margin(3.0 * std::sqrt(3.0 / n)));
}

TEST_CASE("zero intensity absorbs the branching noise") {
  FiniteAtoms atoms;
  atoms.atoms.push_back({3.0, {0.4}});
  RngStream rng(12, 0, 0, 0);
  const JumpBatch b = sample_jumps(LevyMeasureSpec{atoms}, 1, Region::ball(1.0), 0.0, 0.5, rng);
  CHECK(b.sizes.empty());
  CHECK(b.times.empty());
}

TEST_CASE("cone shell sampling: empirical rate matches the quadrature mass") {
  const double delta = 0.1;
  const LevyMeasureSpec cone{TruncatedStableCone{0.5}};
  // independent shell-mass oracle (2-d polar quadrature on a fine grid)
  double mass_oracle = 0.0;
  {
    const int n = 200000;
    for (int i = 0; i < n; ++i) {
      const double ra = delta + (1.0 - delta) * double(i) / n;
      const double rb = delta + (1.0 - delta) * double(i + 1) / n;
      mass_oracle += 0.5 * (std::pow(ra, -1.5) + std::pow(rb, -1.5)) * (rb - ra);
    }
    mass_oracle *= M_PI / 2.0;
  }
  const Region shell = Region::shell(delta, 1.0);
  CHECK(levy_mass(cone, 2, shell).value == Catch::Approx(mass_oracle).epsilon(1e-6));

  const int n_trials = 10000;
  const double dt = 0.05;
  double count = 0.0;
  RngStream rng(13, 0, 0, 0);
  const RestrictedSampler sampler(cone, 2, shell);
  for (int i = 0; i < n_trials; ++i) {
    const JumpBatch b = sample_jumps(sampler, shell, 1.0, dt, rng);
    count += static_cast<double>(b.sizes.size());
    for (const auto& z : b.sizes) {
      const double r = norm2(z);
      REQUIRE(r > delta);
      REQUIRE(r <= 1.0);
      REQUIRE(z[0] >= 0.0);
      REQUIRE(z[1] >= 0.0);
    }
  }
  const double lam = mass_oracle * dt;
  CHECK(count / n_trials == Catch::Approx(lam).margin(3.0 * std::sqrt(lam / n_trials)));
}

TEST_CASE("small jump drift: closed forms and Monte Carlo agreement") {
  // stable axis measure: component equals ∫_δ^1 z^{-α} dz -> 2 as δ -> 0
  const LevyMeasureSpec stable{PerCoordinateStable{0, 0.5, true}};
  const Vec drift = small_jump_drift(stable, 2, 1e-12, 1.0);
  CHECK(drift[0] == Catch::Approx(2.0).epsilon(1e-5));
  CHECK(drift[1] == 0.0);

  FiniteAtoms atoms;
  atoms.atoms.push_back({1.5, {0.3, 0.2}});
  const Vec adrift = small_jump_drift(LevyMeasureSpec{atoms}, 2, 0.1, 1.0);
  CHECK(adrift[0] == Catch::Approx(1.5 * 0.3));
  CHECK(adrift[1] == Catch::Approx(1.5 * 0.2));

  // isotropic cone: agreement with the Monte Carlo mean of sampled jumps
  const LevyMeasureSpec cone{TruncatedStableCone{0.5}};
  const Region shell = Region::shell(0.1, 1.0);
  const Vec cdrift = small_jump_drift(cone, 2, 0.1, 1.0);
  const RestrictedSampler sampler(cone, 2, shell);
  RngStream rng(14, 0, 0, 0);
  const int n = 200000;
  Vec mean(2, 0.0), m2(2, 0.0);
  for (int i = 0; i < n; ++i) {
    const Vec z = sampler.sample(rng);
    for (int k = 0; k < 2; ++k) {
      mean[k] += z[k];
      m2[k] += z[k] * z[k];
    }
  }
  const double mass = sampler.mass();
  for (int k = 0; k < 2; ++k) {
    const double mu = mean[k] / n;
    const double se = std::sqrt((m2[k] / n - mu * mu) / n);
    CHECK(mass * mu == Catch::Approx(cdrift[k]).margin(3.0 * mass * se));
  }
}

TEST_CASE("symbol: diffusion, indicators, nonnegativity") {
  AdmissibleParams p;
  p.c = {1.0};
  p.beta = {0.0};
  p.B = Mat(1, 1);
  p.nu = LevyMeasureSpec{};
  p.mu = {LevyMeasureSpec{}};
  // pure diffusion, x=2: Re Psi = 2 c x λ^2 = 4 λ^2
  for (const double lam : {0.5, 1.0, 3.0, 10.0})
    CHECK(symbol_re(p, {2.0}, {lam}) == Catch::Approx(4.0 * lam * lam));
  CHECK(symbol_re(p, {2.0}, {0.0}) == 0.0);
  // negative coordinate: branching/diffusion contribution vanishes
  CHECK(symbol_re(p, {-1.0}, {3.0}) == 0.0);
}

TEST_CASE("symbol of a stable branching part has the stable log-log slope") {
  AdmissibleParams p;
  p.c = {0.0};
  p.beta = {0.0};
  p.B = Mat(1, 1);
  p.nu = LevyMeasureSpec{};
  p.mu = {LevyMeasureSpec{PerCoordinateStable{0, 1.5, false}}};
  Vec lx, ly;
  for (int i = 0; i <= 20; ++i) {
    const double lam = 10.0 * std::pow(100.0, double(i) / 20.0);  // [10, 1e3]
    const double s = symbol_re(p, {1.0}, {lam});
    REQUIRE(s >= 0.0);
    lx.push_back(std::log(lam));
    ly.push_back(std::log(s));
  }
  CHECK(linear_fit(lx, ly).slope == Catch::Approx(1.5).margin(0.05));
}

TEST_CASE("one-minus-cos power integral matches its closed-form limit") {
  using levy_detail::OneMinusCosPower;
  // alpha = 1/2: ∫_0^inf (1-cos u) u^{-3/2} du = sqrt(2 pi)
  CHECK(OneMinusCosPower::limit(0.5) == Catch::Approx(std::sqrt(2.0 * M_PI)).epsilon(1e-12));
  // the x^{-1/2} remnant at x = 1e6 is ~8e-4 of the limit
  CHECK(OneMinusCosPower::direct(0.5, 1e6) ==
        Catch::Approx(std::sqrt(2.0 * M_PI)).epsilon(3e-3));
  // table lookups agree with direct evaluation
  OneMinusCosPower table(1.2, 500.0);
  for (const double x : {0.1, 0.7, 3.0, 48.9, 433.0})
    CHECK(table.at(x) == Catch::Approx(OneMinusCosPower::direct(1.2, x)).epsilon(1e-9));
}

TEST_CASE("symbol is nonnegative across measure variants") {
  AdmissibleParams p;
  p.c = {0.1, 0.0};
  p.beta = {0.0, 0.0};
  p.B = Mat(2, 2);
  p.nu = LevyMeasureSpec{TruncatedStableCone{0.5}};
  FiniteAtoms atoms;
  atoms.atoms.push_back({0.7, {0.2, 0.6}});
  p.mu = {LevyMeasureSpec{atoms}, LevyMeasureSpec{PerCoordinateStable{1, 1.2, true}}};
  RngStream rng(15, 0, 0, 0);
  for (int i = 0; i < 50; ++i) {
    const Vec x{rng.uniform(-1.0, 3.0), rng.uniform(-1.0, 3.0)};
    const Vec lam{rng.uniform(-30.0, 30.0), rng.uniform(-30.0, 30.0)};
    CHECK(symbol_re(p, x, lam) >= -1e-10);
  }
  CHECK(symbol_re(p, {1.0, 1.0}, {0.0, 0.0}) == 0.0);
}

TEST_CASE("restricted sampling throws on infinite mass") {
  const LevyMeasureSpec stable{PerCoordinateStable{0, 0.5, true}};
  RngStream rng(16, 0, 0, 0);
  CHECK_THROWS_AS(sample_jumps(stable, 1, Region::ball(1.0), 1.0, 0.1, rng), InfiniteMass);
}
