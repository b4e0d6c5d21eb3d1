#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "capdim/boxcount.hpp"
#include "capdim/capacity.hpp"
#include "capdim/grassmann.hpp"
#include "capdim/kernels.hpp"
#include "capdim/pointset.hpp"
#include "capdim/profiles.hpp"
#include "capdim/psi.hpp"
#include "capdim/serialize.hpp"

namespace capdim {

// Uniform envelope for everything the tool can run end to end: the exact
// configuration that produced the numbers is echoed next to them, and pass
// is the conjunction of the listed checks.  Reports carry no clocks or host
// state, so rerunning a config + seed reproduces the bytes.
struct ExperimentReport {
  std::string experiment_id;
  json config;
  json results;
  bool pass = false;
  std::vector<std::string> violations;
};

inline json to_json(const ExperimentReport& rep) {
  return json{{"experiment_id", rep.experiment_id},
              {"config", rep.config},
              {"results", rep.results},
              {"pass", rep.pass},
              {"violations", rep.violations}};
}

// ---- capacity vs box count ------------------------------------------------

// At kernel powers at or above the ambient dimension, capacity and occupied
// cube counts track each other up to dimensional constants.  The suite
// records the per-scale ratio band and the gap between the two log-log
// slopes.
struct CapacityBoxcountConfig {
  double s = 0.0;  // 0 means dim + 1
  RGridOptions grid;
  SolveOptions solve;
  std::size_t window = 5;
  double max_band_ratio = 100.0;
  double max_slope_gap = 0.10;
};

inline ExperimentReport run_capacity_boxcount(const PointSet& e,
                                              const CapacityBoxcountConfig& cfg) {
  ExperimentReport rep;
  rep.experiment_id = "capacity-boxcount";

  const double s = cfg.s > 0.0 ? cfg.s : static_cast<double>(e.dim) + 1.0;
  const double diam = diameter(e);
  const double gap = min_gap(e);
  const std::vector<double> r_grid = make_r_grid(diam, gap, cfg.grid);

  rep.config = json{{"s", s},
                    {"points", e.count()},
                    {"dim", e.dim},
                    {"grid_ratio", cfg.grid.ratio},
                    {"grid_gap_factor", cfg.grid.gap_factor},
                    {"grid_top_fraction", cfg.grid.top_fraction},
                    {"solver_tol", cfg.solve.tol},
                    {"solver_max_iter", cfg.solve.max_iter},
                    {"solver_restarts", cfg.solve.restarts},
                    {"seed", cfg.solve.seed},
                    {"window", cfg.window},
                    {"max_band_ratio", cfg.max_band_ratio},
                    {"max_slope_gap", cfg.max_slope_gap}};

  const std::vector<CapacityResult> caps = capacity_curve(e, s, r_grid, cfg.solve);
  const std::vector<BoxCountResult> counts = count_curve(e, r_grid);

  json rows = json::array();
  std::vector<double> cap_vals, count_vals;
  double band_lo = 0.0, band_hi = 0.0;
  bool first = true, all_converged = true;
  for (std::size_t i = 0; i < r_grid.size(); ++i) {
    const double ratio =
        static_cast<double>(counts[i].count) / caps[i].capacity;
    rows.push_back(json{{"r", r_grid[i]},
                        {"capacity", caps[i].capacity},
                        {"count", counts[i].count},
                        {"count_to_capacity", ratio},
                        {"kkt_residual", caps[i].kkt_residual},
                        {"converged", caps[i].converged}});
    all_converged = all_converged && caps[i].converged;
    cap_vals.push_back(caps[i].capacity);
    count_vals.push_back(static_cast<double>(counts[i].count));
    band_lo = first ? ratio : std::min(band_lo, ratio);
    band_hi = first ? ratio : std::max(band_hi, ratio);
    first = false;
  }

  const ScalingFit cap_fit = fit_scaling(r_grid, cap_vals, cfg.window);
  const ScalingFit count_fit = fit_scaling(r_grid, count_vals, cfg.window);
  const double slope_gap = std::fabs(cap_fit.slope_ols - count_fit.slope_ols);
  const double band_ratio = band_lo > 0.0 ? band_hi / band_lo : 0.0;

  rep.results = json{{"rows", rows},
                     {"band_min", band_lo},
                     {"band_max", band_hi},
                     {"band_ratio", band_ratio},
                     {"capacity_slope", cap_fit.slope_ols},
                     {"count_slope", count_fit.slope_ols},
                     {"slope_gap", slope_gap}};

  if (!all_converged) rep.violations.push_back("capacity solve missed certificate");
  if (!(band_ratio > 0.0) || band_ratio > cfg.max_band_ratio)
    rep.violations.push_back("count/capacity ratio band wider than allowed");
  if (slope_gap > cfg.max_slope_gap)
    rep.violations.push_back("capacity and count slopes disagree");
  rep.pass = rep.violations.empty();
  return rep;
}

// ---- smoothed kernel vs capped kernel --------------------------------------

// The capped inverse-power kernel and its Gaussian smoothing differ only by
// dimensional constants; the suite measures the observed phi/psi band over a
// wide radius range and spot-checks that rescaling x and r together leaves
// psi unchanged.
struct PsiPhiConfig {
  std::size_t n = 2;
  std::vector<double> s_values = {0.5, 1.0, 1.5};
  double ratio_min = 1e-3;
  double ratio_max = 1e3;
  std::size_t ratio_points = 61;
  double max_band_ratio = 1e3;
  double scaling_tol = 1e-6;
};

inline ExperimentReport run_psi_phi(const PsiPhiConfig& cfg) {
  ExperimentReport rep;
  rep.experiment_id = "psi-phi";
  rep.config = json{{"n", cfg.n},
                    {"s_values", cfg.s_values},
                    {"ratio_min", cfg.ratio_min},
                    {"ratio_max", cfg.ratio_max},
                    {"ratio_points", cfg.ratio_points},
                    {"max_band_ratio", cfg.max_band_ratio},
                    {"scaling_tol", cfg.scaling_tol}};

  json per_s = json::array();
  bool pass = true;
  for (double s : cfg.s_values) {
    const PsiRadial& ev = psi_evaluator(cfg.n, s);
    double lo = 0.0, hi = 0.0;
    bool first = true;
    for (std::size_t i = 0; i < cfg.ratio_points; ++i) {
      const double t = static_cast<double>(i) /
                       static_cast<double>(cfg.ratio_points - 1);
      const double rho = cfg.ratio_min *
                         std::pow(cfg.ratio_max / cfg.ratio_min, t);
      const double ratio = phi_radial(s, 1.0, rho) / ev(rho);
      lo = first ? ratio : std::min(lo, ratio);
      hi = first ? ratio : std::max(hi, ratio);
      first = false;
    }
    const double band = hi / lo;

    // Scaling identity: psi at scale r equals the unit-scale profile at
    // x / r.  Checked through the public kernel interface.
    double worst_scaling = 0.0;
    for (double r : {0.25, 1.0, 7.5}) {
      for (double rho : {0.5, 2.0, 40.0}) {
        std::vector<double> x(cfg.n, 0.0);
        x[0] = rho * r;
        KernelSpec scaled{KernelSpec::Family::psi, s, r};
        KernelSpec unit{KernelSpec::Family::psi, s, 1.0};
        std::vector<double> xr(cfg.n, 0.0);
        xr[0] = rho;
        const double a = psi(scaled, x.data(), cfg.n);
        const double b = psi(unit, xr.data(), cfg.n);
        worst_scaling = std::max(worst_scaling, std::fabs(a - b) / b);
      }
    }

    per_s.push_back(json{{"s", s},
                         {"band_min", lo},
                         {"band_max", hi},
                         {"band_ratio", band},
                         {"scaling_deviation", worst_scaling}});
    if (band >= cfg.max_band_ratio) {
      pass = false;
      rep.violations.push_back("phi/psi band too wide at s=" + format_double(s));
    }
    if (worst_scaling > cfg.scaling_tol) {
      pass = false;
      rep.violations.push_back("psi scaling identity broken at s=" +
                               format_double(s));
    }
  }
  rep.results = json{{"per_s", per_s}};
  rep.pass = pass;
  return rep;
}

// ---- tube probabilities -----------------------------------------------------

// Random-projection tube probabilities against closed forms where they exist
// and against the capped kernel band everywhere else.
struct TubeConfig {
  std::vector<std::pair<std::size_t, std::size_t>> pairs = {
      {2, 1}, {3, 1}, {3, 2}, {4, 2}};
  std::vector<double> ratios = {1.0, 3.0, 10.0, 100.0};
  std::vector<double> exact_ratios = {2.0, 5.0, 10.0, 100.0};
  std::size_t exact_trials = 100000;
  std::size_t band_trials = 1000000;
  double band_lo = 0.1;
  double band_hi = 20.0;
  double sigmas = 3.0;
  std::uint64_t seed = 0;
};

inline ExperimentReport run_tube(const TubeConfig& cfg) {
  ExperimentReport rep;
  rep.experiment_id = "tube";
  json pair_list = json::array();
  for (auto [n, m] : cfg.pairs) pair_list.push_back(json::array({n, m}));
  rep.config = json{{"pairs", pair_list},
                    {"ratios", cfg.ratios},
                    {"exact_ratios", cfg.exact_ratios},
                    {"exact_trials", cfg.exact_trials},
                    {"band_trials", cfg.band_trials},
                    {"band_lo", cfg.band_lo},
                    {"band_hi", cfg.band_hi},
                    {"sigmas", cfg.sigmas},
                    {"seed", cfg.seed}};

  json exact_rows = json::array();
  bool pass = true;

  // Closed forms: a line in the plane hits the tube around x with probability
  // (2/pi) asin(r/|x|); a line in 3-space with probability r/|x|.
  for (auto [n, m] : cfg.pairs) {
    if (!((n == 2 && m == 1) || (n == 3 && m == 1))) continue;
    for (double rho : cfg.exact_ratios) {
      std::vector<double> x(n, 0.0);
      x[0] = rho;
      const std::uint64_t cell_seed = Rng(cfg.seed)
                                          .child("tube-exact")
                                          .child(n * 131 + m * 17)
                                          .child(std::uint64_t(rho * 1024.0))
                                          .seed();
      const TubeEstimate est =
          tube_probability(x, m, 1.0, cfg.exact_trials, cell_seed);
      const double want = (n == 2)
                              ? (2.0 / 3.14159265358979323846) *
                                    std::asin(1.0 / rho)
                              : 1.0 / rho;
      const double dev = std::fabs(est.p_hat - want);
      const double limit = cfg.sigmas * std::max(est.std_error, 1e-12);
      exact_rows.push_back(json{{"n", n},
                                {"m", m},
                                {"ratio", rho},
                                {"p_hat", est.p_hat},
                                {"expected", want},
                                {"std_error", est.std_error},
                                {"deviation", dev}});
      if (dev > limit) {
        pass = false;
        rep.violations.push_back("closed-form mismatch at (n,m,ratio)=(" +
                                 std::to_string(n) + "," + std::to_string(m) +
                                 "," + format_double(rho) + ")");
      }
    }
  }

  json band_rows = json::array();
  for (auto [n, m] : cfg.pairs) {
    const std::uint64_t band_seed =
        Rng(cfg.seed).child("tube-suite").child(n * 131 + m * 17).seed();
    const TubeComparability band = verify_tube_comparability(
        n, m, cfg.ratios, cfg.band_trials, band_seed);
    for (const auto& row : band.rows) {
      band_rows.push_back(json{{"n", n},
                               {"m", m},
                               {"ratio", row.ratio},
                               {"p_hat", row.p_hat},
                               {"std_error", row.std_error},
                               {"phi", row.phi_value},
                               {"p_to_phi", row.ratio_to_phi}});
      if (row.ratio_to_phi < cfg.band_lo || row.ratio_to_phi > cfg.band_hi) {
        pass = false;
        rep.violations.push_back("tube/phi ratio outside band at (n,m,ratio)=(" +
                                 std::to_string(n) + "," + std::to_string(m) +
                                 "," + format_double(row.ratio) + ")");
      }
    }
  }

  rep.results = json{{"exact", exact_rows}, {"band", band_rows}};
  rep.pass = pass;
  return rep;
}

// ---- profile inequality family ---------------------------------------------

struct InequalitiesConfig {
  std::vector<double> s_grid = {0.25, 0.5, 0.75, 1.0, 1.25, 1.5, 1.75, 2.0};
  double tol = 0.05;
  RGridOptions grid;
  ProfileOptions profile;
};

inline ExperimentReport run_inequalities(const PointSet& e,
                                         const InequalitiesConfig& cfg) {
  ExperimentReport rep;
  rep.experiment_id = "inequalities";
  rep.config = json{{"s_grid", cfg.s_grid},
                    {"tol", cfg.tol},
                    {"points", e.count()},
                    {"dim", e.dim},
                    {"grid_ratio", cfg.grid.ratio},
                    {"grid_gap_factor", cfg.grid.gap_factor},
                    {"grid_top_fraction", cfg.grid.top_fraction},
                    {"window", cfg.profile.window},
                    {"solver_tol", cfg.profile.solve.tol},
                    {"seed", cfg.profile.solve.seed}};

  const std::vector<double> r_grid =
      make_r_grid(diameter(e), min_gap(e), cfg.grid);
  const ProfileCurve curve = profile_curve(e, cfg.s_grid, r_grid, cfg.profile);
  const InequalityReport ineq = verify_inequalities(curve, cfg.tol);

  rep.results = json{{"profile", to_json(curve)}, {"inequalities", to_json(ineq)}};
  for (const auto& v : ineq.violations)
    rep.violations.push_back("check " + v.check + " fails at (s,t)=(" +
                             format_double(v.s) + "," + format_double(v.t) +
                             ") by " + format_double(v.magnitude));
  rep.pass = ineq.pass;
  return rep;
}

// ---- projected slopes vs the profile ---------------------------------------

// Random m-dimensional projections of E: box-count slopes of the shadows
// against the capacity profile at s = m.  The profile bounds every shadow
// from above (within a margin) and is the typical value.
struct ProjectExperimentConfig {
  std::size_t m = 1;
  std::size_t num_subspaces = 50;
  std::uint64_t seed = 0;
  std::size_t solver_cap = 4096;
  // Optional replacement for the decimated solver input.  Stride decimation
  // of a product set thins only the minor axis, which skews the profile; a
  // caller holding a structured subset (say a coarser stage of the same
  // construction) passes it here.  Must have the same dim as the full set.
  PointSet solver_set;
  RGridOptions grid;
  ProfileOptions profile;
  std::size_t window = 5;
  double upper_margin = 0.07;
  double within_tol = 0.1;
  double required_fraction = 0.8;
};

inline ExperimentReport run_project_experiment(const PointSet& e,
                                               const ProjectExperimentConfig& cfg) {
  ExperimentReport rep;
  rep.experiment_id = "project-experiment";
  rep.config = json{{"m", cfg.m},
                    {"num_subspaces", cfg.num_subspaces},
                    {"seed", cfg.seed},
                    {"solver_cap", cfg.solver_cap},
                    {"points", e.count()},
                    {"dim", e.dim},
                    {"grid_ratio", cfg.grid.ratio},
                    {"grid_gap_factor", cfg.grid.gap_factor},
                    {"grid_top_fraction", cfg.grid.top_fraction},
                    {"window", cfg.window},
                    {"upper_margin", cfg.upper_margin},
                    {"within_tol", cfg.within_tol},
                    {"required_fraction", cfg.required_fraction}};

  // Dense-solver input: the caller's structured subset when given, otherwise
  // canonical decimation.  Shadows are always counted on the full sample.
  if (cfg.solver_set.count() > 0 && cfg.solver_set.dim != e.dim)
    throw invalid_parameter("project experiment: solver set dim mismatch");
  const PointSet solver_set = cfg.solver_set.count() > 0
                                  ? cfg.solver_set
                                  : subsample(e, cfg.solver_cap);
  const std::vector<double> r_grid =
      make_r_grid(diameter(solver_set), min_gap(solver_set), cfg.grid);

  const ScalingFit profile_fit = estimate_profile(
      solver_set, static_cast<double>(cfg.m), r_grid, cfg.profile);
  const double d_m = profile_fit.slope_ols;

  std::vector<double> slopes;
  json subspace_rows = json::array();
  for (std::size_t k = 0; k < cfg.num_subspaces; ++k) {
    const std::uint64_t sub_seed =
        Rng(cfg.seed).child("project-subspaces").child(k).seed();
    const Subspace v = sample_subspace(e.dim, cfg.m, sub_seed);
    const PointSet shadow = project(e, v);
    std::vector<double> counts;
    counts.reserve(r_grid.size());
    for (double r : r_grid)
      counts.push_back(static_cast<double>(mesh_count(shadow, r).count));
    const ScalingFit fit = fit_scaling(r_grid, counts, cfg.window);
    slopes.push_back(fit.slope_ols);
    subspace_rows.push_back(json{{"index", k}, {"slope", fit.slope_ols}});
  }

  std::vector<double> sorted = slopes;
  std::sort(sorted.begin(), sorted.end());
  const double median = sorted.size() % 2 == 1
                            ? sorted[sorted.size() / 2]
                            : 0.5 * (sorted[sorted.size() / 2 - 1] +
                                     sorted[sorted.size() / 2]);
  std::size_t within = 0;
  double worst_excess = 0.0;
  for (double sl : slopes) {
    if (std::fabs(sl - d_m) <= cfg.within_tol) ++within;
    worst_excess = std::max(worst_excess, sl - (d_m + cfg.upper_margin));
  }
  const double frac_within =
      static_cast<double>(within) / static_cast<double>(slopes.size());

  rep.results = json{{"profile_slope", d_m},
                     {"profile_fit", to_json(profile_fit)},
                     {"solver_points", solver_set.count()},
                     {"subspaces", subspace_rows},
                     {"median_slope", median},
                     {"fraction_within", frac_within},
                     {"worst_excess_over_bound", worst_excess}};

  if (worst_excess > 0.0)
    rep.violations.push_back("a projected slope exceeds the profile bound");
  if (std::fabs(median - d_m) > cfg.within_tol)
    rep.violations.push_back("median projected slope is away from the profile");
  if (frac_within < cfg.required_fraction)
    rep.violations.push_back("too few projected slopes near the profile");
  rep.pass = rep.violations.empty();
  return rep;
}

}  // namespace capdim
