#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "capdim/pointset.hpp"
#include "capdim/profiles.hpp"
#include "oracles.hpp"

using namespace capdim;

namespace {

std::vector<double> geometric_grid(double top, double ratio, int n) {
  std::vector<double> g;
  double r = top;
  for (int i = 0; i < n; ++i, r *= ratio) g.push_back(r);
  return g;
}

// Build a profile curve by hand from a target slope function, bypassing any
// solver, so the inequality checker is tested in isolation.
ProfileCurve synthetic_curve(std::size_t dim, const std::vector<double>& s_grid,
                             double (*d_of_s)(double)) {
  ProfileCurve curve;
  curve.dim = dim;
  curve.s_grid = s_grid;
  const auto grid = geometric_grid(0.5, 0.5, 12);
  for (double s : s_grid) {
    std::vector<double> values;
    for (double r : grid) values.push_back(std::pow(r, -d_of_s(s)));
    curve.fits.push_back(fit_scaling(grid, values));
  }
  return curve;
}

}  // namespace

TEST_CASE("exact power law recovers its slope with zero width") {
  const auto grid = geometric_grid(1.0, 0.5, 10);
  std::vector<double> values;
  for (double r : grid) values.push_back(3.0 * std::pow(r, -0.75));
  const auto fit = fit_scaling(grid, values);
  REQUIRE(fit.slope_ols == Catch::Approx(0.75).margin(1e-12));
  REQUIRE(fit.slope_lower == Catch::Approx(0.75).margin(1e-12));
  REQUIRE(fit.slope_upper == Catch::Approx(0.75).margin(1e-12));
  REQUIRE(fit.slope_stderr < 1e-10);

  std::vector<double> xs = fit.xs, ys = fit.ys;
  REQUIRE(oracle::ols_slope(xs, ys) == Catch::Approx(0.75).margin(1e-12));
}

TEST_CASE("fit is invariant under rescaling the values") {
  const auto grid = geometric_grid(0.8, 0.6, 9);
  std::vector<double> a, b;
  for (double r : grid) {
    a.push_back(std::pow(r, -0.6));
    b.push_back(1e5 * std::pow(r, -0.6));
  }
  const auto fa = fit_scaling(grid, a);
  const auto fb = fit_scaling(grid, b);
  REQUIRE(fa.slope_ols == Catch::Approx(fb.slope_ols).margin(1e-12));
}

TEST_CASE("two-regime data yields honest lower and upper slopes") {
  // First half of the scales grows like r^-1, second half like r^-0.5.
  const auto grid = geometric_grid(1.0, 0.5, 16);
  std::vector<double> values;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double d = i < 8 ? 1.0 : 0.5;
    const double anchor = i < 8 ? 1.0 : std::pow(grid[8], 0.5 - 1.0);
    values.push_back(anchor * std::pow(grid[i], -d));
  }
  const auto fit = fit_scaling(grid, values, 5);
  REQUIRE(fit.slope_lower <= 0.55);
  REQUIRE(fit.slope_upper >= 0.95);
  REQUIRE(fit.slope_ols > fit.slope_lower);
  REQUIRE(fit.slope_ols < fit.slope_upper);
}

TEST_CASE("fit input validation") {
  std::vector<double> grid = {0.5, 0.25, 0.125};
  std::vector<double> vals = {1.0, 2.0, 4.0};
  REQUIRE_THROWS_AS(fit_scaling(grid, vals, 2), invalid_parameter);
  REQUIRE_THROWS_AS(fit_scaling(grid, vals, 5), invalid_parameter);
  std::vector<double> bad = {1.0, -2.0, 4.0};
  REQUIRE_THROWS_AS(fit_scaling(grid, bad, 3), invalid_parameter);
  std::vector<double> mism = {1.0, 2.0};
  REQUIRE_THROWS_AS(fit_scaling(grid, mism, 3), invalid_parameter);
}

TEST_CASE("default radius grid respects diameter and separation floor") {
  RGridOptions opts;
  const auto grid = make_r_grid(1.0, 1e-4, opts);
  REQUIRE(grid.size() >= 4);
  REQUIRE(grid.front() <= 0.5 + 1e-12);
  REQUIRE(grid.back() >= 5e-4 - 1e-15);
  for (std::size_t i = 1; i < grid.size(); ++i)
    REQUIRE(grid[i] == Catch::Approx(grid[i - 1] * opts.ratio).epsilon(1e-12));
  REQUIRE_THROWS_AS(make_r_grid(1.0, 0.2, opts), invalid_parameter);
}

TEST_CASE("segment capacity slope at s above the dimension rises toward one") {
  const auto e = make_segment(2049);
  ProfileOptions opts;
  // Windows touching the diameter depress the slope, so the coarse grid
  // reads low and the finer window recovers most of the gap to 1.  Both
  // values are frozen from converged runs to catch solver regressions.
  const auto coarse = estimate_profile(e, 1.5, geometric_grid(0.25, 0.5, 7), opts);
  const auto fine = estimate_profile(
      e, 1.5, geometric_grid(0.02, 1.0 / std::sqrt(2.0), 7), opts);
  REQUIRE(coarse.slope_ols == Catch::Approx(0.786).margin(0.02));
  REQUIRE(fine.slope_ols == Catch::Approx(0.918).margin(0.02));
  REQUIRE(fine.slope_ols > coarse.slope_ols + 0.1);
}

TEST_CASE("profile floor guards against sub-separation scales") {
  const auto e = make_segment(33);  // spacing 1/32
  ProfileOptions opts;
  const auto bad = geometric_grid(0.25, 0.5, 10);  // bottoms out near 1e-3
  REQUIRE_THROWS_AS(estimate_profile(e, 1.0, bad, opts), invalid_parameter);
}

TEST_CASE("piecewise-linear profile passes every structural check") {
  std::vector<double> s_grid = {0.25, 0.5, 0.75, 1.0, 1.25, 1.5, 1.75, 2.0};
  const auto curve =
      synthetic_curve(2, s_grid, +[](double s) { return std::min(s, 0.5); });
  const auto report = verify_inequalities(curve, 1e-6);
  REQUIRE(report.pass);
  for (const auto& chk : report.checks) {
    INFO(chk.check);
    REQUIRE(chk.pass);
  }
}

TEST_CASE("superlinear profile trips the interpolation and growth checks") {
  std::vector<double> s_grid = {0.25, 0.5, 0.75, 1.0, 1.25, 1.5};
  const auto curve =
      synthetic_curve(2, s_grid, +[](double s) { return 0.9 * s * s; });
  const auto report = verify_inequalities(curve, 1e-3);
  REQUIRE_FALSE(report.pass);
  bool reciprocal_failed = false, lipschitz_failed = false;
  for (const auto& chk : report.checks) {
    if (chk.check == "c-reciprocal-deficit" && !chk.pass)
      reciprocal_failed = true;
    if (chk.check == "d-lipschitz" && !chk.pass) lipschitz_failed = true;
  }
  REQUIRE(reciprocal_failed);
  REQUIRE(lipschitz_failed);
  REQUIRE_FALSE(report.violations.empty());
}

TEST_CASE("profile exceeding the ambient dimension is flagged") {
  std::vector<double> s_grid = {0.5, 1.0, 1.5};
  const auto curve =
      synthetic_curve(1, s_grid, +[](double) { return 1.4; });
  const auto report = verify_inequalities(curve, 0.01);
  REQUIRE_FALSE(report.pass);
  bool range_failed = false;
  for (const auto& chk : report.checks)
    if (chk.check == "a-ordering-range" && !chk.pass) range_failed = true;
  REQUIRE(range_failed);
}
