#pragma once

#include <cmath>
#include <cstdint>
#include <unordered_set>
#include <vector>

#include "capdim/errors.hpp"
#include "capdim/pointset.hpp"

namespace capdim {

// Count of occupied closed mesh cubes of diameter r.  The mesh is the
// coordinate grid with side r/sqrt(n), anchored at the origin, and a point
// lands in the cube indexed by floor(x_i * sqrt(n) / r) per coordinate.
struct BoxCountResult {
  double r = 0.0;
  double cube_side = 0.0;
  std::size_t count = 0;
};

inline BoxCountResult mesh_count(const PointSet& e, double r) {
  if (e.count() == 0) throw invalid_parameter("mesh count: empty set");
  if (!(r > 0.0)) throw invalid_parameter("mesh count: r must be positive");
  const double scale = std::sqrt(static_cast<double>(e.dim)) / r;

  std::unordered_set<std::uint64_t> cells;
  cells.reserve(e.count() * 2);
  for (std::size_t i = 0; i < e.count(); ++i) {
    const double* x = e.point(i);
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (std::size_t j = 0; j < e.dim; ++j) {
      const double scaled = x[j] * scale;
      if (!(std::fabs(scaled) < 4.6e18))
        throw invalid_parameter(
            "mesh count: r too small for the coordinate range");
      const std::int64_t idx = static_cast<std::int64_t>(std::floor(scaled));
      std::uint64_t b = static_cast<std::uint64_t>(idx);
      for (int byte = 0; byte < 8; ++byte) {
        h = (h ^ (b & 0xff)) * 0x100000001b3ull;
        b >>= 8;
      }
    }
    cells.insert(h);
  }
  BoxCountResult out;
  out.r = r;
  out.cube_side = 1.0 / scale;
  out.count = cells.size();
  return out;
}

// One count per grid value.  On nested grids (each r an integer divisor of
// the previous) the counts are monotone nondecreasing as r shrinks; general
// grids only satisfy the looser cube-refinement bound.
inline std::vector<BoxCountResult> count_curve(const PointSet& e,
                                               const std::vector<double>& r_grid) {
  if (r_grid.empty()) throw invalid_parameter("count curve: empty r grid");
  std::vector<BoxCountResult> out;
  out.reserve(r_grid.size());
  for (double r : r_grid) out.push_back(mesh_count(e, r));
  return out;
}

}  // namespace capdim
