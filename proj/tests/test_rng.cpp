#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "cbi/rng.hpp"

using namespace cbi;

TEST_CASE("streams are reproducible and key-separated") {
  RngStream a(42, 7, 3, 1), b(42, 7, 3, 1);
  for (int i = 0; i < 100; ++i) REQUIRE(a.next_u64() == b.next_u64());

  RngStream c(42, 7, 3, 2);
  RngStream d(42, 7, 4, 1);
  RngStream e(43, 7, 3, 1);
  RngStream base(42, 7, 3, 1);
  const auto first = base.next_u64();
  CHECK(c.next_u64() != first);
  CHECK(d.next_u64() != first);
  CHECK(e.next_u64() != first);
}

TEST_CASE("uniform lies strictly inside (0,1) with the right moments") {
  RngStream rng(1, 0, 0, 0);
  const int n = 200000;
  double s = 0.0, s2 = 0.0;
  for (int i = 0; i < n; ++i) {
    const double u = rng.uniform();
    REQUIRE(u > 0.0);
    REQUIRE(u < 1.0);
    s += u;
    s2 += u * u;
  }
  const double mean = s / n;
  const double var = s2 / n - mean * mean;
  CHECK(mean == Catch::Approx(0.5).margin(4.0 / std::sqrt(12.0 * n)));
  CHECK(var == Catch::Approx(1.0 / 12.0).margin(0.002));
}

TEST_CASE("normal has unit variance and no skew") {
  RngStream rng(2, 0, 0, 0);
  const int n = 200000;
  double s = 0.0, s2 = 0.0, s3 = 0.0;
  for (int i = 0; i < n; ++i) {
    const double z = rng.normal();
    s += z;
    s2 += z * z;
    s3 += z * z * z;
  }
  CHECK(s / n == Catch::Approx(0.0).margin(4.0 / std::sqrt(double(n))));
  CHECK(s2 / n == Catch::Approx(1.0).margin(0.02));
  CHECK(s3 / n == Catch::Approx(0.0).margin(0.05));
}

TEST_CASE("poisson matches its first two moments, including chunked means") {
  for (const double mean : {0.3, 4.0, 120.0}) {
    RngStream rng(3, 0, 0, static_cast<std::uint64_t>(mean * 10));
    const int n = mean > 50 ? 20000 : 100000;
    double s = 0.0, s2 = 0.0;
    for (int i = 0; i < n; ++i) {
      const double k = static_cast<double>(rng.poisson(mean));
      s += k;
      s2 += k * k;
    }
    const double m = s / n;
    const double var = s2 / n - m * m;
    CHECK(m == Catch::Approx(mean).margin(5.0 * std::sqrt(mean / n)));
    CHECK(var == Catch::Approx(mean).epsilon(0.05));
  }
}

TEST_CASE("exponential has the requested rate") {
  RngStream rng(4, 0, 0, 0);
  const int n = 100000;
  double s = 0.0;
  for (int i = 0; i < n; ++i) s += rng.exponential(2.0);
  CHECK(s / n == Catch::Approx(0.5).margin(4.0 * 0.5 / std::sqrt(double(n))));
}
