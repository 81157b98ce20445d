#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "cbi/rng.hpp"
#include "cbi/stats.hpp"

using namespace cbi;

TEST_CASE("linear fit recovers an exact line") {
  Vec xs{1, 2, 3, 4, 5}, ys;
  for (double x : xs) ys.push_back(2.0 * x + 1.0);
  const LineFit f = linear_fit(xs, ys);
  CHECK(f.slope == Catch::Approx(2.0).epsilon(1e-12));
  CHECK(f.intercept == Catch::Approx(1.0).epsilon(1e-12));
  CHECK(f.slope_stderr == Catch::Approx(0.0).margin(1e-12));
}

TEST_CASE("chi-square tail probabilities match tabulated quantiles") {
  // dof=2 has the closed form Q(x) = e^{-x/2}
  CHECK(chi_square_pvalue(5.991, 2) == Catch::Approx(std::exp(-5.991 / 2.0)).epsilon(1e-10));
  CHECK(chi_square_pvalue(3.841, 1) == Catch::Approx(0.05).margin(5e-4));
  CHECK(chi_square_pvalue(18.307, 10) == Catch::Approx(0.05).margin(5e-4));
  CHECK(chi_square_pvalue(0.0, 5) == 1.0);
}

TEST_CASE("goodness of fit accepts matched counts and rejects biased ones") {
  std::vector<double> expected{50, 50, 50, 50};
  std::vector<double> matched{48, 52, 55, 45};
  std::vector<double> biased{10, 90, 80, 20};
  CHECK(chi_square_gof(matched, expected).p_value > 0.05);
  CHECK(chi_square_gof(biased, expected).p_value < 1e-6);
}

TEST_CASE("small expected bins are pooled") {
  std::vector<double> expected{0.5, 0.5, 1.0, 3.0, 100.0, 2.0};
  std::vector<double> observed{1, 0, 1, 3, 100, 2};
  const auto r = chi_square_gof(observed, expected);
  CHECK(r.dof <= 1.0);
  CHECK(r.p_value > 0.01);
}

TEST_CASE("mean and stderr") {
  const MeanStderr ms = mean_stderr({1.0, 2.0, 3.0, 4.0});
  CHECK(ms.mean == Catch::Approx(2.5));
  CHECK(ms.stderr_ == Catch::Approx(std::sqrt(5.0 / 3.0 / 4.0)));
}

TEST_CASE("bootstrap stderr of a sample mean tracks the analytic one") {
  RngStream rng(9, 0, 0, 0);
  Vec xs;
  for (int i = 0; i < 2000; ++i) xs.push_back(rng.normal());
  const MeanStderr ms = mean_stderr(xs);
  const double bs = bootstrap_stderr(xs.size(), 400, 7, [&](const std::vector<std::size_t>& idx) {
    double s = 0.0;
    for (std::size_t i : idx) s += xs[i];
    return s / static_cast<double>(idx.size());
  });
  CHECK(bs == Catch::Approx(ms.stderr_).epsilon(0.15));
}
