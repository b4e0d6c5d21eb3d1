#pragma once

#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "capdim/boxcount.hpp"
#include "capdim/capacity.hpp"
#include "capdim/errors.hpp"
#include "capdim/grassmann.hpp"
#include "capdim/pointset.hpp"
#include "capdim/profiles.hpp"

namespace capdim {

using json = nlohmann::json;

// All floating-point text goes through one shortest-round-trip-ish format so
// CSV output is reproducible byte for byte.
inline std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

// ---- point sets ----------------------------------------------------------

// CSV: one point per row, comma-separated coordinates, no header.
inline void save_points_csv(const PointSet& e, std::ostream& os) {
  for (std::size_t i = 0; i < e.count(); ++i) {
    const double* x = e.point(i);
    for (std::size_t j = 0; j < e.dim; ++j) {
      if (j) os << ',';
      os << format_double(x[j]);
    }
    os << '\n';
  }
}

inline PointSet load_points_csv(std::istream& is) {
  PointSet e;
  std::string line;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::vector<double> row;
    std::size_t pos = 0;
    while (pos <= line.size()) {
      std::size_t next = line.find(',', pos);
      if (next == std::string::npos) next = line.size();
      const std::string cell = line.substr(pos, next - pos);
      try {
        row.push_back(std::stod(cell));
      } catch (const std::exception&) {
        throw invalid_parameter("points csv: bad number '" + cell + "'");
      }
      pos = next + 1;
    }
    if (e.dim == 0)
      e.dim = row.size();
    else if (row.size() != e.dim)
      throw invalid_parameter("points csv: ragged rows");
    e.coords.insert(e.coords.end(), row.begin(), row.end());
  }
  if (e.dim == 0) throw invalid_parameter("points csv: empty input");
  return e;
}

inline json points_to_json(const PointSet& e) {
  json pts = json::array();
  for (std::size_t i = 0; i < e.count(); ++i) {
    json row = json::array();
    for (std::size_t j = 0; j < e.dim; ++j) row.push_back(e.point(i)[j]);
    pts.push_back(std::move(row));
  }
  return json{{"dim", e.dim}, {"points", std::move(pts)}};
}

inline PointSet points_from_json(const json& j) {
  PointSet e;
  if (!j.contains("dim") || !j.contains("points"))
    throw invalid_parameter("points json: need keys 'dim' and 'points'");
  e.dim = j.at("dim").get<std::size_t>();
  if (e.dim == 0) throw invalid_parameter("points json: dim must be positive");
  for (const auto& row : j.at("points")) {
    if (row.size() != e.dim) throw invalid_parameter("points json: ragged rows");
    for (const auto& c : row) e.coords.push_back(c.get<double>());
  }
  return e;
}

inline void save_points(const PointSet& e, const std::string& path,
                        const std::string& format) {
  std::ofstream os(path);
  if (!os) throw invalid_parameter("cannot open for writing: " + path);
  if (format == "json")
    os << points_to_json(e).dump(2) << '\n';
  else if (format == "csv")
    save_points_csv(e, os);
  else
    throw invalid_parameter("unknown format: " + format);
}

inline PointSet load_points(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw invalid_parameter("cannot open: " + path);
  if (path.size() >= 5 && path.compare(path.size() - 5, 5, ".json") == 0) {
    json j;
    is >> j;
    return points_from_json(j);
  }
  return load_points_csv(is);
}

// ---- results -------------------------------------------------------------

inline json to_json(const CapacityResult& c) {
  return json{{"r", c.r},
              {"s", c.s},
              {"capacity", c.capacity},
              {"min_energy", c.min_energy},
              {"kkt_residual", c.kkt_residual},
              {"iterations", c.iterations},
              {"converged", c.converged},
              {"support_size", c.support_size}};
}

inline void save_weights_csv(const PointSet& e, const DiscreteMeasure& m,
                             std::ostream& os) {
  if (m.weights.size() != e.count())
    throw invalid_parameter("weights csv: size mismatch");
  for (std::size_t i = 0; i < e.count(); ++i) {
    for (std::size_t j = 0; j < e.dim; ++j) os << format_double(e.point(i)[j]) << ',';
    os << format_double(m.weights[i]) << '\n';
  }
}

inline json to_json(const BoxCountResult& b) {
  return json{{"r", b.r}, {"cube_side", b.cube_side}, {"count", b.count}};
}

inline void save_counts_csv(const std::vector<BoxCountResult>& curve,
                            std::ostream& os) {
  os << "r,cube_side,count\n";
  for (const auto& b : curve)
    os << format_double(b.r) << ',' << format_double(b.cube_side) << ','
       << b.count << '\n';
}

inline json to_json(const ScalingFit& f) {
  return json{{"xs", f.xs},
              {"ys", f.ys},
              {"slope_ols", f.slope_ols},
              {"slope_lower", f.slope_lower},
              {"slope_upper", f.slope_upper},
              {"slope_stderr", f.slope_stderr},
              {"window", f.window}};
}

inline void save_profile_csv(const ProfileCurve& curve, std::ostream& os) {
  os << "s,slope_lower,slope_ols,slope_upper,stderr\n";
  for (std::size_t i = 0; i < curve.s_grid.size(); ++i) {
    const ScalingFit& f = curve.fits[i];
    os << format_double(curve.s_grid[i]) << ',' << format_double(f.slope_lower)
       << ',' << format_double(f.slope_ols) << ','
       << format_double(f.slope_upper) << ',' << format_double(f.slope_stderr)
       << '\n';
  }
}

inline json to_json(const ProfileCurve& curve) {
  json fits = json::array();
  for (const auto& f : curve.fits) fits.push_back(to_json(f));
  return json{{"dim", curve.dim}, {"s_grid", curve.s_grid}, {"fits", fits}};
}

inline json to_json(const InequalityReport& rep) {
  json checks = json::array();
  for (const auto& c : rep.checks)
    checks.push_back(json{{"check", c.check}, {"pass", c.pass}, {"worst", c.worst}});
  json violations = json::array();
  for (const auto& v : rep.violations)
    violations.push_back(
        json{{"check", v.check}, {"s", v.s}, {"t", v.t}, {"magnitude", v.magnitude}});
  return json{{"tol", rep.tol},
              {"pass", rep.pass},
              {"checks", checks},
              {"violations", violations}};
}

inline json to_json(const Subspace& v) {
  return json{{"n", v.n}, {"m", v.m}, {"basis_colmajor", v.basis}};
}

inline Subspace subspace_from_json(const json& j) {
  Subspace v;
  v.n = j.at("n").get<std::size_t>();
  v.m = j.at("m").get<std::size_t>();
  v.basis = j.at("basis_colmajor").get<std::vector<double>>();
  if (v.basis.size() != v.n * v.m)
    throw invalid_parameter("subspace json: basis size mismatch");
  return v;
}

inline void write_text(const std::string& path, const std::string& text) {
  std::ofstream os(path);
  if (!os) throw invalid_parameter("cannot open for writing: " + path);
  os << text;
}

}  // namespace capdim
