#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "cbi/quadrature.hpp"

using namespace cbi;

TEST_CASE("power_integral closed forms") {
  CHECK(power_integral(2.0, 0.0, 1.0).value == Catch::Approx(1.0 / 3.0));
  CHECK(power_integral(-0.5, 0.0, 1.0).value == Catch::Approx(2.0));
  CHECK(power_integral(-1.5, 1.0, INFINITY).value == Catch::Approx(2.0));
  CHECK(power_integral(-1.0, 1.0, std::exp(1.0)).value == Catch::Approx(1.0));
  CHECK(power_integral(-1.5, 0.5, 2.0).value ==
        Catch::Approx((std::pow(0.5, -0.5) - std::pow(2.0, -0.5)) / 0.5));

  CHECK(power_integral(-1.0, 0.0, 1.0).divergent);
  CHECK(power_integral(-1.5, 0.0, 1.0).divergent);
  CHECK(power_integral(-0.9, 1.0, INFINITY).divergent);
  CHECK(power_integral(-1.0, 1.0, INFINITY).divergent);
  CHECK_FALSE(power_integral(-1.0000001, 1.0, INFINITY).divergent);
}

TEST_CASE("adaptive Simpson on smooth and discontinuous integrands") {
  CHECK(quad::adaptive_simpson([](double x) { return x * x * x; }, 0.0, 1.0, 1e-12) ==
        Catch::Approx(0.25).epsilon(1e-10));
  CHECK(quad::adaptive_simpson([](double x) { return std::sin(x); }, 0.0, M_PI, 1e-12) ==
        Catch::Approx(2.0).epsilon(1e-10));
  // indicator of [0,1] integrated over [-1,2]: localizes the two jumps
  const double ind = quad::adaptive_simpson(
      [](double x) { return (x >= 0.0 && x <= 1.0) ? 1.0 : 0.0; }, -1.0, 2.0, 1e-11);
  CHECK(ind == Catch::Approx(1.0).margin(1e-9));
}

TEST_CASE("Gauss-Legendre panel is exact for low-degree polynomials") {
  for (int k = 0; k <= 12; ++k) {
    const double exact = 1.0 / (k + 1.0);
    CHECK(quad::gl15([k](double x) { return std::pow(x, k); }, 0.0, 1.0) ==
          Catch::Approx(exact).epsilon(1e-13));
  }
}

TEST_CASE("tail integration detects convergence and divergence") {
  const auto conv = quad::integrate_to_inf([](double z) { return std::pow(z, -2.5); }, 1.0, 1e-10);
  REQUIRE_FALSE(conv.divergent);
  CHECK(conv.value == Catch::Approx(1.0 / 1.5).epsilon(1e-8));

  CHECK(quad::integrate_to_inf([](double z) { return std::pow(z, -0.9); }, 1.0, 1e-10).divergent);
  CHECK(quad::integrate_to_inf([](double z) { return std::pow(z, -1.0); }, 1.0, 1e-10).divergent);

  const auto expo =
      quad::integrate_to_inf([](double z) { return std::exp(-z); }, 0.5, 1e-12);
  REQUIRE_FALSE(expo.divergent);
  CHECK(expo.value == Catch::Approx(std::exp(-0.5)).epsilon(1e-9));
}

TEST_CASE("origin integration detects convergence and divergence") {
  const auto conv =
      quad::integrate_from_origin([](double z) { return std::pow(z, -0.5); }, 1.0, 1e-10);
  REQUIRE_FALSE(conv.divergent);
  CHECK(conv.value == Catch::Approx(2.0).epsilon(1e-6));

  CHECK(
      quad::integrate_from_origin([](double z) { return std::pow(z, -1.5); }, 1.0, 1e-10).divergent);
  CHECK(
      quad::integrate_from_origin([](double z) { return std::pow(z, -1.0); }, 1.0, 1e-10).divergent);
}

TEST_CASE("quadrature agrees with closed-form power integrals") {
  // a small sweep of exponents, both sides of the convergence boundary
  for (double q : {-0.2, -0.7, 0.3, 1.7}) {
    const auto m = quad::integrate_from_origin([q](double z) { return std::pow(z, q); }, 1.0, 1e-10);
    REQUIRE_FALSE(m.divergent);
    CHECK(m.value == Catch::Approx(1.0 / (q + 1.0)).epsilon(1e-6));
  }
  for (double q : {-1.3, -2.0, -3.5}) {
    const auto m = quad::integrate_to_inf([q](double z) { return std::pow(z, q); }, 1.0, 1e-10);
    REQUIRE_FALSE(m.divergent);
    CHECK(m.value == Catch::Approx(-1.0 / (q + 1.0)).epsilon(1e-7));
  }
}
