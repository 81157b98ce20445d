#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "cbi/oracle.hpp"

using namespace cbi;

namespace {

AdmissibleParams cir_params(double c, double beta, double b) {
  AdmissibleParams p;
  p.c = {c};
  p.beta = {beta};
  p.B = Mat(1, 1);
  p.B(0, 0) = b;
  p.nu = LevyMeasureSpec{};
  p.mu = {LevyMeasureSpec{}};
  return p;
}

// Fixed-step RK4 on v' = b v - c v^2, A' = beta v; independent of the
// library's adaptive integrator and of the closed form.
double cir_laplace_rk4_oracle(double c, double beta, double b, double x0, double t,
                              double lambda) {
  const int n = 20000;
  const double h = t / n;
  double v = lambda, A = 0.0;
  const auto fv = [&](double w) { return b * w - c * w * w; };
  for (int k = 0; k < n; ++k) {
    const double k1 = fv(v), a1 = beta * v;
    const double k2 = fv(v + 0.5 * h * k1), a2 = beta * (v + 0.5 * h * k1);
    const double k3 = fv(v + 0.5 * h * k2), a3 = beta * (v + 0.5 * h * k2);
    const double k4 = fv(v + h * k3), a4 = beta * (v + h * k3);
    v += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    A += h / 6.0 * (a1 + 2.0 * a2 + 2.0 * a3 + a4);
  }
  return std::exp(-A - x0 * v);
}

}  // namespace

TEST_CASE("laplace_cir normalization and short-time limits") {
  CHECK(laplace_cir(1.0, 1.0, -1.0, 1.0, 1.0, 0.0) == 1.0);
  CHECK(laplace_cir(1.0, 1.0, -1.0, 1.0, 1e-8, 2.0) ==
        Catch::Approx(std::exp(-2.0)).margin(1e-6));
  CHECK_THROWS_AS(laplace_cir(0.0, 1.0, -1.0, 1.0, 1.0, 1.0), OutOfRange);
  CHECK_THROWS_AS(laplace_cir(1.0, 1.0, -1.0, 1.0, 1.0, -0.5), OutOfRange);
}

TEST_CASE("two independent routes agree on the reference CIR value") {
  // c=1, beta=1, b=-1, x0=1, t=1, lambda=1; frozen after the RK4 oracle and
  // the closed form agreed to ~1e-23
  const double frozen = 0.48905525537925623;
  const double closed = laplace_cir(1.0, 1.0, -1.0, 1.0, 1.0, 1.0);
  const double rk4 = cir_laplace_rk4_oracle(1.0, 1.0, -1.0, 1.0, 1.0, 1.0);
  CHECK(closed == Catch::Approx(frozen).margin(1e-12));
  CHECK(rk4 == Catch::Approx(frozen).margin(1e-10));
  CHECK(std::abs(closed - rk4) < 1e-10);

  const AdmissibleParams p = cir_params(1.0, 1.0, -1.0);
  CHECK(laplace_cbi_1d(p, 1.0, 1.0, 1.0, 1e-10) == Catch::Approx(frozen).margin(1e-8));
}

TEST_CASE("the adaptive Riccati solver reduces to the CIR closed form") {
  for (const double b : {-1.0, 0.0, 0.4}) {
    for (const double lam : {0.3, 1.0, 2.5}) {
      const AdmissibleParams p = cir_params(0.7, 1.3, b);
      const double closed = laplace_cir(0.7, 1.3, b, 0.8, 0.9, lam);
      CHECK(laplace_cbi_1d(p, 0.8, 0.9, lam, 1e-10) == Catch::Approx(closed).margin(1e-8));
    }
  }
}

TEST_CASE("pure compound-Poisson immigration has the product closed form") {
  AdmissibleParams p = cir_params(0.0, 1.0, 0.0);
  FiniteAtoms nu;
  nu.atoms.push_back({2.0, {0.7}});
  p.nu = LevyMeasureSpec{nu};
  // E[e^{-lam X_t}] = e^{-lam (x0 + beta t)} exp(r t (e^{-lam z0} - 1)),
  // frozen from the closed form
  const double expected[] = {0.33600682035055791, 0.13441417436655230, 0.029992555679880364};
  const double lams[] = {0.5, 1.0, 2.0};
  for (int i = 0; i < 3; ++i)
    CHECK(laplace_cbi_1d(p, 0.0, 1.0, lams[i], 1e-11) ==
          Catch::Approx(expected[i]).margin(1e-8));
}

TEST_CASE("laplace transforms are monotone in lambda and lie in (0,1]") {
  AdmissibleParams p = cir_params(0.0, 1.0, -0.5);
  p.mu = {sum_of({LevyMeasureSpec{PerCoordinateStable{0, 1.5, true}},
                  LevyMeasureSpec{FiniteAtoms{{{0.3, {2.0}}}}}})};
  double prev = 1.0;
  for (double lam = 0.0; lam <= 4.0; lam += 0.25) {
    const double v = laplace_cbi_1d(p, 1.0, 1.0, lam, 1e-9);
    CHECK(v > 0.0);
    CHECK(v <= 1.0 + 1e-12);
    CHECK(v <= prev + 1e-10);
    prev = v;
  }
}

TEST_CASE("complete monotonicity spot check: second differences are nonnegative") {
  AdmissibleParams p = cir_params(0.5, 1.0, -1.0);
  p.mu = {LevyMeasureSpec{PerCoordinateStable{0, 1.4, true}}};
  const double h = 0.2;
  Vec vals;
  for (int i = 0; i <= 20; ++i) vals.push_back(laplace_cbi_1d(p, 1.0, 1.0, h * i, 1e-10));
  for (std::size_t i = 1; i + 1 < vals.size(); ++i)
    CHECK(vals[i + 1] - 2.0 * vals[i] + vals[i - 1] >= -1e-9);
}

TEST_CASE("the Riccati grid keeps v nonnegative and starts at lambda0") {
  AdmissibleParams p = cir_params(1.0, 0.5, -1.0);
  const RiccatiSolution sol = riccati_solve(p, 2.0, 1.5, 1e-10);
  REQUIRE_FALSE(sol.v.empty());
  CHECK(sol.v.front() == 1.5);
  CHECK(sol.lambda0 == 1.5);
  for (double v : sol.v) CHECK(v >= 0.0);
  CHECK(sol.grid.back() == Catch::Approx(2.0));
}
