#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "capdim/boxcount.hpp"
#include "capdim/capacity.hpp"
#include "capdim/errors.hpp"
#include "capdim/pointset.hpp"

namespace capdim {

// Log-log regression of a positive quantity against scale.  xs = -log r,
// ys = log value.  Alongside the full-range least-squares slope, min and max
// slopes over rolling windows stand in for the lim inf / lim sup a finite
// sample cannot reach.
struct ScalingFit {
  std::vector<double> xs;
  std::vector<double> ys;
  double slope_ols = 0.0;
  double slope_lower = 0.0;
  double slope_upper = 0.0;
  double slope_stderr = 0.0;
  std::size_t window = 5;
};

namespace detail {

struct OlsLine {
  double slope = 0.0;
  double intercept = 0.0;
  double stderr_slope = 0.0;
};

inline OlsLine ols(const double* xs, const double* ys, std::size_t n) {
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
  OlsLine line;
  if (sxx <= 0.0) throw invalid_parameter("fit: degenerate abscissae");
  line.slope = sxy / sxx;
  line.intercept = my - line.slope * mx;
  if (n > 2) {
    double sse = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double res = ys[i] - (line.intercept + line.slope * xs[i]);
      sse += res * res;
    }
    line.stderr_slope = std::sqrt(sse / static_cast<double>(n - 2) / sxx);
  }
  return line;
}

}  // namespace detail

inline ScalingFit fit_scaling(const std::vector<double>& r_grid,
                              const std::vector<double>& values,
                              std::size_t window = 5) {
  if (window < 3) throw invalid_parameter("fit: window must be >= 3");
  if (r_grid.size() != values.size())
    throw invalid_parameter("fit: grid and value lengths differ");
  if (r_grid.size() < window)
    throw invalid_parameter("fit: fewer grid points than the window");

  ScalingFit fit;
  fit.window = window;
  std::vector<std::pair<double, double>> pts(r_grid.size());
  for (std::size_t i = 0; i < r_grid.size(); ++i) {
    if (!(r_grid[i] > 0.0) || !(values[i] > 0.0))
      throw invalid_parameter("fit: grid and values must be positive");
    pts[i] = {-std::log(r_grid[i]), std::log(values[i])};
  }
  std::sort(pts.begin(), pts.end());
  fit.xs.resize(pts.size());
  fit.ys.resize(pts.size());
  for (std::size_t i = 0; i < pts.size(); ++i) {
    fit.xs[i] = pts[i].first;
    fit.ys[i] = pts[i].second;
  }

  const detail::OlsLine full = detail::ols(fit.xs.data(), fit.ys.data(),
                                           fit.xs.size());
  fit.slope_ols = full.slope;
  fit.slope_stderr = full.stderr_slope;

  double lo = full.slope, hi = full.slope;
  bool first = true;
  for (std::size_t start = 0; start + window <= fit.xs.size(); ++start) {
    const detail::OlsLine piece =
        detail::ols(fit.xs.data() + start, fit.ys.data() + start, window);
    if (first) {
      lo = hi = piece.slope;
      first = false;
    } else {
      lo = std::min(lo, piece.slope);
      hi = std::max(hi, piece.slope);
    }
  }
  fit.slope_lower = lo;
  fit.slope_upper = hi;
  return fit;
}

// Geometric scale grid between the resolution floor and a fraction of the
// diameter.  Scales at or beyond the sample's resolution say nothing about
// the set, hence the gap-driven floor; the top stays below the diameter
// because the first octave of any bounded set is all boundary effect.
struct RGridOptions {
  double ratio = 0.5;
  double gap_factor = 5.0;
  double top_fraction = 0.5;
};

inline std::vector<double> make_r_grid(double diam, double gap,
                                       const RGridOptions& opts = {}) {
  if (!(diam > 0.0) || !(gap > 0.0))
    throw invalid_parameter("r grid: need positive diameter and gap");
  if (!(opts.ratio > 0.0 && opts.ratio < 1.0))
    throw invalid_parameter("r grid: ratio must lie in (0,1)");
  const double floor_r = opts.gap_factor * gap;
  std::vector<double> grid;
  for (double r = diam * opts.top_fraction; r >= floor_r; r *= opts.ratio)
    grid.push_back(r);
  if (grid.size() < 4)
    throw invalid_parameter("r grid: fewer than 4 scales between floor and top");
  return grid;
}

struct ProfileOptions {
  SolveOptions solve;
  std::size_t window = 5;
  double gap_factor = 5.0;
  KernelSpec::Family family = KernelSpec::Family::phi;
};

// Capacity scaling exponent at one kernel power s.  Throws numerical_error if
// any grid solve misses its certificate; callers that want partial output
// should drive capacity_curve themselves.
inline ScalingFit estimate_profile(const PointSet& e, double s,
                                   const std::vector<double>& r_grid,
                                   const ProfileOptions& opts = {}) {
  if (r_grid.size() < 4)
    throw invalid_parameter("profile: need at least 4 grid scales");
  if (e.count() > 1) {
    // A singleton has no resolution floor; its capacity is 1 at every scale
    // and the fit below is exactly flat.
    const double gap = min_gap(e);
    const double floor_r = opts.gap_factor * gap;
    for (double r : r_grid)
      if (r < floor_r)
        throw invalid_parameter(
            "profile: grid scale below the resolution floor (gap_factor * min gap)");
  }

  const std::vector<CapacityResult> curve =
      capacity_curve(e, s, r_grid, opts.solve, opts.family);
  std::vector<double> values;
  values.reserve(curve.size());
  for (const CapacityResult& c : curve) {
    if (!c.converged)
      throw numerical_error("profile: capacity solve missed its certificate",
                            c.kkt_residual);
    values.push_back(c.capacity);
  }
  return fit_scaling(r_grid, values, opts.window);
}

struct ProfileCurve {
  std::size_t dim = 0;
  std::vector<double> s_grid;
  std::vector<ScalingFit> fits;
};

inline ProfileCurve profile_curve(const PointSet& e,
                                  const std::vector<double>& s_grid,
                                  const std::vector<double>& r_grid,
                                  const ProfileOptions& opts = {}) {
  if (s_grid.empty()) throw invalid_parameter("profile curve: empty s grid");
  ProfileCurve out;
  out.dim = e.dim;
  out.s_grid = s_grid;
  out.fits.reserve(s_grid.size());
  for (double s : s_grid)
    out.fits.push_back(estimate_profile(e, s, r_grid, opts));
  return out;
}

// Structural constraints every profile family obeys; estimated curves are
// held to them within an additive tolerance.  Violations are reported with
// the pair and magnitude so a failing curve can be diagnosed from the
// serialized report alone.
struct InequalityViolation {
  std::string check;
  double s = 0.0;
  double t = 0.0;
  double magnitude = 0.0;
};

struct InequalityCheckSummary {
  std::string check;
  bool pass = true;
  double worst = 0.0;
};

struct InequalityReport {
  double tol = 0.05;
  bool pass = true;
  std::vector<InequalityCheckSummary> checks;
  std::vector<InequalityViolation> violations;
};

enum class SlopeKind { ols, lower, upper };

inline InequalityReport verify_inequalities(const ProfileCurve& curve,
                                            double tol = 0.05,
                                            SlopeKind kind = SlopeKind::ols) {
  if (curve.s_grid.size() != curve.fits.size() || curve.s_grid.empty())
    throw invalid_parameter("inequalities: malformed profile curve");
  const double n = static_cast<double>(curve.dim);

  auto slope = [&](std::size_t i) {
    switch (kind) {
      case SlopeKind::lower: return curve.fits[i].slope_lower;
      case SlopeKind::upper: return curve.fits[i].slope_upper;
      default: return curve.fits[i].slope_ols;
    }
  };

  std::vector<std::size_t> order(curve.s_grid.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return curve.s_grid[a] < curve.s_grid[b];
  });

  InequalityReport rep;
  rep.tol = tol;
  rep.checks = {{"a-ordering-range", true, 0.0},
                {"b-lower-bound", true, 0.0},
                {"c-reciprocal-deficit", true, 0.0},
                {"d-lipschitz", true, 0.0}};

  auto record = [&](std::size_t check_idx, double s, double t, double excess) {
    auto& summary = rep.checks[check_idx];
    summary.worst = std::max(summary.worst, excess);
    if (excess > 0.0) {
      summary.pass = false;
      rep.pass = false;
      rep.violations.push_back({summary.check, s, t, excess});
    }
  };

  for (std::size_t a = 0; a < order.size(); ++a) {
    const double s = curve.s_grid[order[a]];
    const double ds = slope(order[a]);
    record(0, s, s, std::max(-ds, ds - n) - tol);
    record(1, s, s, ds - s - tol);
    for (std::size_t b = a + 1; b < order.size(); ++b) {
      const double t = curve.s_grid[order[b]];
      const double dt = slope(order[b]);
      record(0, s, t, (ds - dt) - tol);
      const double denom = 1.0 + (1.0 / s - 1.0 / t) * dt;
      if (denom > 1e-12) record(1, s, t, (dt / denom - ds) - tol);
      if (ds > tol && dt > tol)
        record(2, s, t,
               ((1.0 / ds - 1.0 / s) - (1.0 / dt - 1.0 / t)) - tol);
      record(3, s, t, ((dt - ds) - (t - s)) - tol);
    }
  }
  return rep;
}

}  // namespace capdim
