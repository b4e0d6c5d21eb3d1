// capdim: point-cloud capacity, box-counting, and projection toolkit.
//
// Subcommands: generate, capacity, boxcount, profile, project-experiment,
// verify.  JSON is the canonical report format; profile curves also come out
// as CSV for plotting.  Exit codes: 0 ran and passed, 1 usage error,
// 2 resource cap exceeded, 3 numerical failure or failed verification.

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "capdim/capdim.hpp"

using namespace capdim;

namespace {

json load_json_file(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw invalid_parameter("cannot open: " + path);
  json j;
  is >> j;
  return j;
}

// Config-file fallback: a flag given on the command line wins; otherwise the
// JSON config supplies the value.
template <typename T>
void cfg_fill(const json& cfg, const char* key, const CLI::Option* opt,
              T& var) {
  if (opt != nullptr && opt->count() > 0) return;
  if (cfg.contains(key)) var = cfg.at(key).get<T>();
}

void emit(const json& report, const std::string& out) {
  const std::string text = report.dump(2) + "\n";
  if (out.empty())
    std::fputs(text.c_str(), stdout);
  else
    write_text(out, text);
}

std::string sibling_csv_path(const std::string& out) {
  const std::size_t dot = out.find_last_of('.');
  const std::size_t slash = out.find_last_of('/');
  if (dot == std::string::npos || (slash != std::string::npos && dot < slash))
    return out + ".csv";
  return out.substr(0, dot) + ".csv";
}

PointSet load_set(const std::string& path, std::size_t point_cap) {
  if (path.empty()) throw invalid_parameter("missing --set <path>");
  PointSet e = load_points(path);
  if (e.count() > point_cap)
    throw resource_limit("input set exceeds --point-cap (" +
                         std::to_string(e.count()) + " > " +
                         std::to_string(point_cap) + ")");
  return e;
}

std::vector<double> auto_or_explicit_grid(const PointSet& e,
                                          const std::vector<double>& explicit_r,
                                          const RGridOptions& opts) {
  if (!explicit_r.empty()) return explicit_r;
  if (e.count() < 2)
    throw invalid_parameter(
        "cannot derive a scale grid from fewer than two points; pass --r");
  return make_r_grid(diameter(e), min_gap(e), opts);
}

json grid_json(const std::vector<double>& grid) {
  json j = json::array();
  for (double r : grid) j.push_back(r);
  return j;
}

IfsSpec ifs_from_json(const json& j) {
  IfsSpec spec;
  spec.dim = j.at("dim").get<std::size_t>();
  for (const auto& m : j.at("maps")) {
    IfsMap map;
    map.ratio = m.at("ratio").get<double>();
    map.offset = m.at("offset").get<std::vector<double>>();
    if (m.contains("linear"))
      map.linear = m.at("linear").get<std::vector<double>>();
    spec.maps.push_back(std::move(map));
  }
  return spec;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "capdim: capacity profiles, box counts, and random projections of "
      "finite point clouds"};
  app.fallthrough();
  app.require_subcommand(1);

  // Global flags.
  std::uint64_t seed = 0;
  std::string out;
  std::string format = "json";
  int threads = 1;
  std::size_t point_cap = kDefaultPointCap;
  std::string config_path;
  auto* opt_seed =
      app.add_option("--seed", seed, "root seed for all randomized steps");
  auto* opt_out = app.add_option("--out", out, "output file (default stdout)");
  auto* opt_format = app.add_option("--format", format, "json or csv")
                         ->check(CLI::IsMember({"json", "csv"}));
  app.add_option("--threads", threads,
                 "worker threads (reserved; results do not depend on it)")
      ->check(CLI::PositiveNumber);
  auto* opt_cap = app.add_option("--point-cap", point_cap,
                                 "refuse to generate or load more points");
  app.add_option("--config", config_path,
                 "JSON file with defaults; explicit flags override");

  // ---- generate -----------------------------------------------------------
  auto* gen = app.add_subcommand("generate", "write a point set to a file");
  gen->require_subcommand(1);

  double g_ratio = 1.0 / 3.0;
  int g_depth = 6;
  auto* gen_cantor =
      gen->add_subcommand("cantor", "symmetric Cantor stage endpoints");
  auto* opt_gratio =
      gen_cantor->add_option("--ratio", g_ratio, "contraction ratio in (0,1/2]");
  auto* opt_gdepth =
      gen_cantor->add_option("--depth", g_depth, "construction depth");

  std::size_t g_count = 101;
  auto* gen_segment =
      gen->add_subcommand("segment", "evenly spaced points on [0,1]");
  auto* opt_gcount = gen_segment->add_option("--count", g_count, "point count");

  std::string g_a, g_b;
  auto* gen_product =
      gen->add_subcommand("product", "cartesian product of two saved sets");
  gen_product->add_option("--a", g_a, "first factor (file)")->required();
  gen_product->add_option("--b", g_b, "second factor (file)")->required();

  std::string g_spec;
  int g_ifs_depth = 5;
  auto* gen_ifs = gen->add_subcommand(
      "ifs", "orbit of an iterated-map system given as JSON");
  gen_ifs->add_option("--spec", g_spec, "JSON file: {dim, maps:[{ratio,offset,linear?}]}")
      ->required();
  gen_ifs->add_option("--depth", g_ifs_depth, "composition depth");

  std::size_t g_dim = 2, g_n = 100;
  auto* gen_box =
      gen->add_subcommand("box-sample", "uniform sample of the unit cube");
  gen_box->add_option("--dim", g_dim, "ambient dimension");
  gen_box->add_option("--count", g_n, "sample size");

  // ---- capacity -----------------------------------------------------------
  auto* cap_cmd =
      app.add_subcommand("capacity", "equilibrium capacity at given scales");
  std::string c_set;
  double c_s = 1.0;
  std::vector<double> c_r;
  std::string c_family = "phi";
  double c_tol = 1e-8;
  std::size_t c_max_iter = 100000;
  int c_restarts = 1;
  std::string c_dump_weights;
  RGridOptions c_grid;
  cap_cmd->add_option("--set", c_set, "input point set (csv or json)");
  auto* opt_cs = cap_cmd->add_option("--s", c_s, "kernel exponent");
  cap_cmd->add_option("--r", c_r, "scale; repeat for a grid (default: auto)");
  auto* opt_cfam = cap_cmd->add_option("--family", c_family, "phi or psi")
                       ->check(CLI::IsMember({"phi", "psi"}));
  auto* opt_ctol = cap_cmd->add_option("--tol", c_tol, "certificate tolerance");
  cap_cmd->add_option("--max-iter", c_max_iter, "iteration budget per solve");
  cap_cmd->add_option("--restarts", c_restarts, "extra random starts");
  cap_cmd->add_option("--dump-weights", c_dump_weights,
                      "write the last equilibrium as coords,weight CSV");
  cap_cmd->add_option("--grid-ratio", c_grid.ratio, "auto grid step ratio");
  cap_cmd->add_option("--gap-factor", c_grid.gap_factor,
                      "auto grid floor = factor * min gap");
  cap_cmd->add_option("--top-fraction", c_grid.top_fraction,
                      "auto grid top = fraction * diameter");

  // ---- boxcount -----------------------------------------------------------
  auto* box_cmd = app.add_subcommand("boxcount", "occupied mesh-cube counts");
  std::string b_set;
  std::vector<double> b_r;
  RGridOptions b_grid;
  box_cmd->add_option("--set", b_set, "input point set (csv or json)");
  box_cmd->add_option("--r", b_r, "scale; repeat for a grid (default: auto)");
  box_cmd->add_option("--grid-ratio", b_grid.ratio, "auto grid step ratio");
  box_cmd->add_option("--gap-factor", b_grid.gap_factor,
                      "auto grid floor = factor * min gap");
  box_cmd->add_option("--top-fraction", b_grid.top_fraction,
                      "auto grid top = fraction * diameter");

  // ---- profile --------------------------------------------------------------
  auto* prof_cmd = app.add_subcommand(
      "profile", "capacity scaling exponents across kernel powers");
  std::string p_set;
  std::vector<double> p_s;
  std::vector<double> p_r;
  std::string p_family = "phi";
  double p_tol = 1e-8;
  double p_ineq_tol = 0.05;
  std::size_t p_window = 5;
  RGridOptions p_grid;
  prof_cmd->add_option("--set", p_set, "input point set (csv or json)");
  prof_cmd->add_option("--s", p_s,
                       "kernel exponent; repeat (default 0.25..2 step 0.25)");
  prof_cmd->add_option("--r", p_r, "scale; repeat for a grid (default: auto)");
  auto* opt_pfam = prof_cmd->add_option("--family", p_family, "phi or psi")
                       ->check(CLI::IsMember({"phi", "psi"}));
  std::size_t p_max_iter = 100000;
  prof_cmd->add_option("--tol", p_tol, "solver certificate tolerance");
  prof_cmd->add_option("--max-iter", p_max_iter, "iteration budget per solve");
  auto* opt_ptol = prof_cmd->add_option("--ineq-tol", p_ineq_tol,
                                        "inequality check tolerance");
  prof_cmd->add_option("--window", p_window, "rolling fit window");
  prof_cmd->add_option("--grid-ratio", p_grid.ratio, "auto grid step ratio");
  prof_cmd->add_option("--gap-factor", p_grid.gap_factor,
                       "auto grid floor = factor * min gap");
  prof_cmd->add_option("--top-fraction", p_grid.top_fraction,
                       "auto grid top = fraction * diameter");

  // ---- project-experiment ---------------------------------------------------
  auto* proj_cmd = app.add_subcommand(
      "project-experiment",
      "box-count slopes of random shadows against the capacity profile");
  std::string x_set, x_solver_set;
  ProjectExperimentConfig x_cfg;
  proj_cmd->add_option("--set", x_set, "input point set (csv or json)");
  auto* opt_xm = proj_cmd->add_option("--m", x_cfg.m, "projection rank");
  auto* opt_xk =
      proj_cmd->add_option("--subspaces", x_cfg.num_subspaces, "sample size");
  proj_cmd->add_option("--solver-cap", x_cfg.solver_cap,
                       "decimate beyond this many points for the dense solver");
  proj_cmd->add_option("--solver-set", x_solver_set,
                       "explicit solver subset (file) instead of decimation");
  proj_cmd->add_option("--upper-margin", x_cfg.upper_margin,
                       "allowed slope excess over the profile");
  proj_cmd->add_option("--within-tol", x_cfg.within_tol,
                       "distance that counts as agreeing with the profile");
  proj_cmd->add_option("--required-fraction", x_cfg.required_fraction,
                       "fraction of shadows that must agree");
  proj_cmd->add_option("--window", x_cfg.window, "rolling fit window");
  proj_cmd->add_option("--grid-ratio", x_cfg.grid.ratio, "auto grid step ratio");
  proj_cmd->add_option("--gap-factor", x_cfg.grid.gap_factor,
                       "auto grid floor = factor * min gap");
  proj_cmd->add_option("--top-fraction", x_cfg.grid.top_fraction,
                       "auto grid top = fraction * diameter");

  // ---- verify ----------------------------------------------------------------
  auto* ver_cmd =
      app.add_subcommand("verify", "run a named verification suite");
  std::string v_suite;
  std::string v_set;
  std::vector<double> v_s;
  std::size_t v_n = 2;
  std::size_t v_points = 61;
  std::size_t v_exact_trials = 100000;
  std::size_t v_band_trials = 1000000;
  double v_ineq_tol = 0.05;
  RGridOptions v_grid;
  ver_cmd->add_option("suite", v_suite,
                      "capacity-boxcount | psi-phi | tube | inequalities");
  ver_cmd->add_option("--set", v_set, "point set for set-based suites");
  ver_cmd->add_option("--s", v_s, "kernel exponent(s), suite-specific default");
  ver_cmd->add_option("--n", v_n, "ambient dimension for psi-phi");
  ver_cmd->add_option("--ratio-points", v_points, "psi-phi log-grid size");
  ver_cmd->add_option("--exact-trials", v_exact_trials,
                      "tube trials against closed forms");
  ver_cmd->add_option("--band-trials", v_band_trials,
                      "tube trials for the kernel band");
  ver_cmd->add_option("--ineq-tol", v_ineq_tol, "inequality check tolerance");
  ver_cmd->add_option("--grid-ratio", v_grid.ratio, "auto grid step ratio");
  ver_cmd->add_option("--gap-factor", v_grid.gap_factor,
                      "auto grid floor = factor * min gap");
  ver_cmd->add_option("--top-fraction", v_grid.top_fraction,
                      "auto grid top = fraction * diameter");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    json cfg = json::object();
    if (!config_path.empty()) cfg = load_json_file(config_path);
    cfg_fill(cfg, "seed", opt_seed, seed);
    cfg_fill(cfg, "out", opt_out, out);
    cfg_fill(cfg, "format", opt_format, format);
    cfg_fill(cfg, "point_cap", opt_cap, point_cap);

    if (app.got_subcommand(gen)) {
      PointSet e;
      if (gen->got_subcommand(gen_cantor)) {
        cfg_fill(cfg, "ratio", opt_gratio, g_ratio);
        cfg_fill(cfg, "depth", opt_gdepth, g_depth);
        e = generate_cantor(g_ratio, g_depth, point_cap);
      } else if (gen->got_subcommand(gen_segment)) {
        cfg_fill(cfg, "count", opt_gcount, g_count);
        e = make_segment(g_count);
      } else if (gen->got_subcommand(gen_product)) {
        const PointSet a = load_set(g_a, point_cap);
        const PointSet b = load_set(g_b, point_cap);
        e = product_set(a, b, point_cap);
      } else if (gen->got_subcommand(gen_ifs)) {
        e = generate_ifs(ifs_from_json(load_json_file(g_spec)), g_ifs_depth,
                         point_cap);
      } else {
        Rng rng = Rng(seed).child("box-sample");
        e = random_box_sample(g_dim, g_n, rng);
      }
      if (out.empty())
        throw invalid_parameter("generate requires --out <path>");
      std::string file_format = format;
      if (opt_format->count() == 0 && !cfg.contains("format"))
        file_format = out.size() >= 5 &&
                              out.compare(out.size() - 5, 5, ".json") == 0
                          ? "json"
                          : "csv";
      save_points(e, out, file_format);
      const double diam = e.count() > 1 ? diameter(e) : 0.0;
      const double gap = e.count() > 1 ? min_gap(e) : 0.0;
      std::printf("points=%zu dim=%zu diameter=%s min_gap=%s\n", e.count(),
                  e.dim, format_double(diam).c_str(),
                  format_double(gap).c_str());
      return 0;
    }

    if (app.got_subcommand(cap_cmd)) {
      cfg_fill(cfg, "set", cap_cmd->get_option("--set"), c_set);
      cfg_fill(cfg, "s", opt_cs, c_s);
      cfg_fill(cfg, "family", opt_cfam, c_family);
      cfg_fill(cfg, "tol", opt_ctol, c_tol);
      const PointSet e = load_set(c_set, point_cap);
      const std::vector<double> grid = auto_or_explicit_grid(e, c_r, c_grid);
      SolveOptions opts;
      opts.tol = c_tol;
      opts.max_iter = c_max_iter;
      opts.restarts = c_restarts;
      opts.seed = seed;
      const auto family = c_family == "psi" ? KernelSpec::Family::psi
                                            : KernelSpec::Family::phi;
      const std::vector<CapacityResult> curve =
          capacity_curve(e, c_s, grid, opts, family);

      bool all_converged = true;
      json rows = json::array();
      for (const CapacityResult& res : curve) {
        rows.push_back(to_json(res));
        all_converged = all_converged && res.converged;
      }
      const json report = {
          {"command", "capacity"},
          {"config",
           {{"set", c_set},
            {"s", c_s},
            {"r_grid", grid_json(grid)},
            {"family", c_family},
            {"tol", c_tol},
            {"max_iter", c_max_iter},
            {"restarts", c_restarts},
            {"seed", seed}}},
          {"results", rows},
          {"pass", all_converged}};
      if (format == "csv") {
        std::ostringstream os;
        os << "r,s,capacity,min_energy,kkt_residual,iterations,converged,"
              "support_size\n";
        for (const CapacityResult& res : curve)
          os << format_double(res.r) << ',' << format_double(res.s) << ','
             << format_double(res.capacity) << ','
             << format_double(res.min_energy) << ','
             << format_double(res.kkt_residual) << ',' << res.iterations << ','
             << (res.converged ? 1 : 0) << ',' << res.support_size << '\n';
        if (out.empty())
          std::fputs(os.str().c_str(), stdout);
        else
          write_text(out, os.str());
      } else {
        emit(report, out);
      }
      if (!c_dump_weights.empty() && !curve.empty()) {
        const DedupResult dedup = merge_duplicates(e);
        std::ofstream os(c_dump_weights);
        if (!os)
          throw invalid_parameter("cannot open for writing: " + c_dump_weights);
        save_weights_csv(dedup.points, curve.back().equilibrium, os);
      }
      return all_converged ? 0 : 3;
    }

    if (app.got_subcommand(box_cmd)) {
      cfg_fill(cfg, "set", box_cmd->get_option("--set"), b_set);
      const PointSet e = load_set(b_set, point_cap);
      const std::vector<double> grid = auto_or_explicit_grid(e, b_r, b_grid);
      const std::vector<BoxCountResult> curve = count_curve(e, grid);
      if (format == "csv") {
        std::ostringstream os;
        save_counts_csv(curve, os);
        if (out.empty())
          std::fputs(os.str().c_str(), stdout);
        else
          write_text(out, os.str());
      } else {
        json rows = json::array();
        for (const BoxCountResult& res : curve) rows.push_back(to_json(res));
        emit(json{{"command", "boxcount"},
                  {"config", {{"set", b_set}, {"r_grid", grid_json(grid)}}},
                  {"results", rows},
                  {"pass", true}},
             out);
      }
      return 0;
    }

    if (app.got_subcommand(prof_cmd)) {
      cfg_fill(cfg, "set", prof_cmd->get_option("--set"), p_set);
      cfg_fill(cfg, "family", opt_pfam, p_family);
      cfg_fill(cfg, "ineq_tol", opt_ptol, p_ineq_tol);
      const PointSet e = load_set(p_set, point_cap);
      if (p_s.empty())
        for (int i = 1; i <= 8; ++i) p_s.push_back(0.25 * i);

      std::vector<double> grid;
      if (!p_r.empty()) {
        grid = p_r;
      } else if (e.count() < 2) {
        // Singleton: capacity is 1 at every scale; any grid shows the flat
        // curve, so use a fixed default instead of the diameter.
        for (int i = 0; i < 8; ++i) grid.push_back(0.5 * std::pow(0.5, i));
      } else {
        grid = make_r_grid(diameter(e), min_gap(e), p_grid);
      }

      ProfileOptions popts;
      popts.solve.tol = p_tol;
      popts.solve.max_iter = p_max_iter;
      popts.solve.seed = seed;
      popts.window = p_window;
      popts.gap_factor = p_grid.gap_factor;
      popts.family = p_family == "psi" ? KernelSpec::Family::psi
                                       : KernelSpec::Family::phi;

      ProfileCurve curve;
      curve.dim = e.dim;
      json errors = json::array();
      for (double s : p_s) {
        try {
          ScalingFit fit = estimate_profile(e, s, grid, popts);
          curve.s_grid.push_back(s);
          curve.fits.push_back(std::move(fit));
        } catch (const numerical_error& err) {
          errors.push_back(json{{"s", s}, {"error", err.what()}});
        }
      }

      json report = {{"command", "profile"},
                     {"config",
                      {{"set", p_set},
                       {"s_grid", p_s},
                       {"r_grid", grid_json(grid)},
                       {"family", p_family},
                       {"tol", p_tol},
                       {"ineq_tol", p_ineq_tol},
                       {"window", p_window},
                       {"seed", seed}}},
                     {"errors", errors}};
      bool pass = errors.empty();
      if (!curve.s_grid.empty()) {
        const InequalityReport ineq = verify_inequalities(curve, p_ineq_tol);
        report["profile"] = to_json(curve);
        report["inequalities"] = to_json(ineq);
        pass = pass && ineq.pass;
        if (!out.empty()) {
          std::ostringstream os;
          save_profile_csv(curve, os);
          write_text(sibling_csv_path(out), os.str());
        }
      }
      report["pass"] = pass;
      emit(report, out);
      if (!errors.empty()) return 3;
      return pass ? 0 : 3;
    }

    if (app.got_subcommand(proj_cmd)) {
      cfg_fill(cfg, "set", proj_cmd->get_option("--set"), x_set);
      cfg_fill(cfg, "m", opt_xm, x_cfg.m);
      cfg_fill(cfg, "subspaces", opt_xk, x_cfg.num_subspaces);
      const PointSet e = load_set(x_set, point_cap);
      x_cfg.seed = seed;
      x_cfg.profile.solve.seed = seed;
      if (!x_solver_set.empty())
        x_cfg.solver_set = load_set(x_solver_set, point_cap);
      const ExperimentReport rep = run_project_experiment(e, x_cfg);
      emit(to_json(rep), out);
      return rep.pass ? 0 : 3;
    }

    if (app.got_subcommand(ver_cmd)) {
      ExperimentReport rep;
      if (v_suite == "capacity-boxcount") {
        const PointSet e = v_set.empty() ? generate_cantor(1.0 / 3.0, 10)
                                         : load_set(v_set, point_cap);
        CapacityBoxcountConfig c;
        if (!v_s.empty()) c.s = v_s.front();
        c.grid = v_grid;
        c.solve.seed = seed;
        rep = run_capacity_boxcount(e, c);
      } else if (v_suite == "psi-phi") {
        PsiPhiConfig c;
        c.n = v_n;
        if (!v_s.empty()) c.s_values = v_s;
        c.ratio_points = v_points;
        rep = run_psi_phi(c);
      } else if (v_suite == "tube") {
        TubeConfig c;
        c.exact_trials = v_exact_trials;
        c.band_trials = v_band_trials;
        c.seed = seed;
        rep = run_tube(c);
      } else if (v_suite == "inequalities") {
        const PointSet e = v_set.empty() ? generate_cantor(1.0 / 3.0, 8)
                                         : load_set(v_set, point_cap);
        InequalitiesConfig c;
        if (!v_s.empty()) c.s_grid = v_s;
        c.tol = v_ineq_tol;
        c.grid = v_grid;
        c.profile.solve.seed = seed;
        rep = run_inequalities(e, c);
      } else {
        std::fprintf(stderr,
                     "error: unknown suite '%s' (capacity-boxcount, psi-phi, "
                     "tube, inequalities)\n",
                     v_suite.c_str());
        return 1;
      }
      emit(to_json(rep), out);
      return rep.pass ? 0 : 3;
    }

    std::fprintf(stderr, "error: no subcommand given\n");
    return 1;
  } catch (const resource_limit& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  } catch (const numerical_error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 3;
  } catch (const invalid_parameter& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
}
