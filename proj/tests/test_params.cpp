#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "cbi/params.hpp"
#include "cbi/rng.hpp"

using namespace cbi;

namespace {

AdmissibleParams two_dim_base() {
  AdmissibleParams p;
  p.c = {1.0, 0.0};
  p.beta = {1.0, 1.0};
  p.B = Mat(2, 2);
  p.B(0, 0) = -1.0;
  p.B(0, 1) = 0.5;
  p.B(1, 0) = 0.2;
  p.B(1, 1) = -1.0;
  p.nu = LevyMeasureSpec{};
  p.mu = {LevyMeasureSpec{}, LevyMeasureSpec{}};
  return p;
}

// independent small-z quadrature oracle for ∫_0^1 z^2 z^{-1-a} dz
double small_z_square_oracle(double a) {
  const int n = 400000;
  double acc = 0.0;
  for (int i = 0; i < n; ++i) {
    const double za = double(i) / n, zb = double(i + 1) / n;
    const double mid = 0.5 * (za + zb);
    if (mid <= 0.0) continue;
    acc += std::pow(mid, 1.0 - a) * (zb - za);
  }
  return acc;
}

}  // namespace

TEST_CASE("a clean diffusion tuple validates") {
  const ValidationReport rep = validate(two_dim_base());
  CHECK(rep.ok);
  CHECK(rep.violations.empty());
}

TEST_CASE("negative off-diagonal drift violates condition (iii)") {
  AdmissibleParams p = two_dim_base();
  p.B(0, 1) = -0.5;
  const ValidationReport rep = validate(p);
  REQUIRE_FALSE(rep.ok);
  REQUIRE_FALSE(rep.violations.empty());
  CHECK(rep.violations.front().condition == "(iii)");
}

TEST_CASE("an untruncated stable branching tail with alpha=1/2 fails the moment condition") {
  AdmissibleParams p;
  p.c = {0.0};
  p.beta = {0.0};
  p.B = Mat(1, 1);
  p.nu = LevyMeasureSpec{};
  p.mu = {LevyMeasureSpec{PerCoordinateStable{0, 0.5, false}}};
  const ValidationReport rep = validate(p);
  REQUIRE_FALSE(rep.ok);
  bool found = false;
  for (const auto& v : rep.violations) found = found || v.condition == "(vi)";
  CHECK(found);
  // the small-z part alone is finite (2/3 by the quadrature oracle); the
  // divergence comes from the big-jump tail ∫_1^inf z^{-1/2} dz
  CHECK(levy_moment(p.mu[0], 1, 2.0, Region::ball(1.0)).value ==
        Catch::Approx(2.0 / 3.0).epsilon(1e-9));
  CHECK(small_z_square_oracle(0.5) == Catch::Approx(2.0 / 3.0).epsilon(1e-4));
  CHECK(levy_moment(p.mu[0], 1, 1.0, Region::tail(1.0)).divergent);
}

TEST_CASE("validate is deterministic and idempotent") {
  AdmissibleParams p = two_dim_base();
  p.nu = LevyMeasureSpec{TruncatedStableCone{0.5}};
  const ValidationReport a = validate(p);
  const ValidationReport b = validate(p);
  CHECK(a.ok == b.ok);
  REQUIRE(a.integrals.size() == b.integrals.size());
  for (const auto& [k, v] : a.integrals) CHECK(b.integrals.at(k) == v);
}

TEST_CASE("dimension mismatches throw") {
  AdmissibleParams p = two_dim_base();
  p.beta = {1.0};
  CHECK_THROWS_AS(validate(p), DimensionMismatch);
  p = two_dim_base();
  p.mu.pop_back();
  CHECK_THROWS_AS(validate(p), DimensionMismatch);
  p = two_dim_base();
  FiniteAtoms bad;
  bad.atoms.push_back({1.0, {0.5}});  // 1-d atom in a 2-d tuple
  p.nu = LevyMeasureSpec{bad};
  CHECK_THROWS_AS(validate(p), DimensionMismatch);
}

TEST_CASE("scaling a measure scales its reported integrals") {
  AdmissibleParams p = two_dim_base();
  FiniteAtoms atoms;
  atoms.atoms.push_back({0.8, {0.3, 0.1}});
  atoms.atoms.push_back({0.4, {2.0, 0.0}});
  p.nu = LevyMeasureSpec{atoms};
  const ValidationReport r1 = validate(p);
  FiniteAtoms scaled = atoms;
  for (auto& a : scaled.atoms) a.mass *= 5.0;
  p.nu = LevyMeasureSpec{scaled};
  const ValidationReport r5 = validate(p);
  CHECK(r5.integrals.at("nu: int (1^|z|)") ==
        Catch::Approx(5.0 * r1.integrals.at("nu: int (1^|z|)")));
}

TEST_CASE("effective drift: big-jump mass leaves the diagonal") {
  AdmissibleParams p;
  p.c = {0.0};
  p.beta = {0.0};
  p.B = Mat(1, 1);
  p.B(0, 0) = 0.3;
  p.nu = LevyMeasureSpec{};
  FiniteAtoms atoms;
  atoms.atoms.push_back({2.0, {2.0}});
  p.mu = {LevyMeasureSpec{atoms}};
  const Mat bt = effective_drift(p);
  CHECK(bt(0, 0) == Catch::Approx(0.3 - 2.0));
}

TEST_CASE("effective drift: small-jump first moment joins the off-diagonal") {
  AdmissibleParams p;
  p.c = {0.0, 0.0};
  p.beta = {0.0, 0.0};
  p.B = Mat(2, 2);
  p.nu = LevyMeasureSpec{};
  FiniteAtoms atoms;
  atoms.atoms.push_back({2.0, {0.5, 0.0}});
  p.mu = {LevyMeasureSpec{}, LevyMeasureSpec{atoms}};
  const Mat bt = effective_drift(p);
  CHECK(bt(0, 1) == Catch::Approx(1.0));  // 2 * 0.5
  CHECK(bt(1, 1) == Catch::Approx(0.0));  // atom inside the unit ball
  CHECK(bt(1, 0) == 0.0);
}

TEST_CASE("effective drift of a jump-free tuple is the drift itself") {
  const AdmissibleParams p = two_dim_base();
  const Mat bt = effective_drift(p);
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j)
      CHECK(bt(static_cast<std::size_t>(i), static_cast<std::size_t>(j)) ==
            p.B(static_cast<std::size_t>(i), static_cast<std::size_t>(j)));
}

TEST_CASE("effective drift keeps nonnegative off-diagonals for admissible tuples") {
  RngStream rng(21, 0, 0, 0);
  for (int trial = 0; trial < 25; ++trial) {
    AdmissibleParams p;
    p.c = {rng.uniform(0.0, 1.0), rng.uniform(0.0, 1.0)};
    p.beta = {rng.uniform(0.0, 1.0), rng.uniform(0.0, 1.0)};
    p.B = Mat(2, 2);
    p.B(0, 0) = rng.uniform(-2.0, 0.0);
    p.B(1, 1) = rng.uniform(-2.0, 0.0);
    p.B(0, 1) = rng.uniform(0.0, 1.0);
    p.B(1, 0) = rng.uniform(0.0, 1.0);
    p.nu = LevyMeasureSpec{};
    FiniteAtoms a0, a1;
    a0.atoms.push_back({rng.uniform(0.1, 1.0), {rng.uniform(0.0, 1.5), rng.uniform(0.0, 1.5)}});
    a1.atoms.push_back({rng.uniform(0.1, 1.0), {rng.uniform(0.0, 1.5), rng.uniform(0.0, 1.5)}});
    p.mu = {LevyMeasureSpec{a0}, LevyMeasureSpec{a1}};
    if (!validate(p).ok) continue;
    const Mat bt = effective_drift(p);
    CHECK(bt(0, 1) >= p.B(0, 1));
    CHECK(bt(1, 0) >= p.B(1, 0));
  }
}
