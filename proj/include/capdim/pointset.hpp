#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <numeric>
#include <vector>

#include "capdim/errors.hpp"
#include "capdim/rng.hpp"

namespace capdim {

inline constexpr std::size_t kDefaultPointCap = 100000;

// Finite point sample in R^n, stored flat and point-major: coordinate j of
// point i sits at coords[i * dim + j].
struct PointSet {
  std::size_t dim = 0;
  std::vector<double> coords;

  std::size_t count() const { return dim == 0 ? 0 : coords.size() / dim; }
  const double* point(std::size_t i) const { return coords.data() + i * dim; }
  double* point(std::size_t i) { return coords.data() + i * dim; }
};

inline double distance(const double* a, const double* b, std::size_t dim) {
  double acc = 0.0;
  for (std::size_t j = 0; j < dim; ++j) {
    const double d = a[j] - b[j];
    acc += d * d;
  }
  return std::sqrt(acc);
}

// One contraction y -> ratio * (linear * y) + offset.  `linear` is an
// optional row-major orthogonal dim x dim block; leave it empty for the
// identity.
struct IfsMap {
  double ratio = 0.5;
  std::vector<double> offset;
  std::vector<double> linear;
};

struct IfsSpec {
  std::size_t dim = 1;
  std::vector<IfsMap> maps;
};

namespace detail {

inline void validate_ifs(const IfsSpec& spec) {
  if (spec.dim == 0) throw invalid_parameter("ifs: dim must be positive");
  if (spec.maps.empty()) throw invalid_parameter("ifs: no maps given");
  for (const IfsMap& m : spec.maps) {
    if (!(m.ratio > 0.0 && m.ratio < 1.0))
      throw invalid_parameter("ifs: contraction ratio must lie in (0,1)");
    if (m.offset.size() != spec.dim)
      throw invalid_parameter("ifs: offset length does not match dim");
    if (!m.linear.empty()) {
      const std::size_t n = spec.dim;
      if (m.linear.size() != n * n)
        throw invalid_parameter("ifs: linear block must be dim x dim");
      for (std::size_t a = 0; a < n; ++a)
        for (std::size_t b = a; b < n; ++b) {
          double dot = 0.0;
          for (std::size_t k = 0; k < n; ++k)
            dot += m.linear[k * n + a] * m.linear[k * n + b];
          const double want = (a == b) ? 1.0 : 0.0;
          if (std::fabs(dot - want) > 1e-8)
            throw invalid_parameter("ifs: linear block is not orthogonal");
        }
    }
  }
}

inline void apply_map(const IfsMap& m, std::size_t dim, const double* in,
                      double* out) {
  if (m.linear.empty()) {
    for (std::size_t j = 0; j < dim; ++j)
      out[j] = m.ratio * in[j] + m.offset[j];
  } else {
    for (std::size_t j = 0; j < dim; ++j) {
      double acc = 0.0;
      for (std::size_t k = 0; k < dim; ++k)
        acc += m.linear[j * dim + k] * in[k];
      out[j] = m.ratio * acc + m.offset[j];
    }
  }
}

}  // namespace detail

// Orbit of the origin under all depth-fold compositions, one point per word
// (i_1, ..., i_depth), words enumerated lexicographically and composed as
// f_{i_1}(f_{i_2}(...f_{i_depth}(0))).  Runs of identical output for repeated
// calls are guaranteed: nothing here depends on hashing or threading.
inline PointSet generate_ifs(const IfsSpec& spec, int depth,
                             std::size_t point_cap = kDefaultPointCap) {
  detail::validate_ifs(spec);
  if (depth < 0) throw invalid_parameter("ifs: depth must be >= 0");

  const std::size_t m = spec.maps.size();
  std::size_t total = 1;
  for (int k = 0; k < depth; ++k) {
    if (total > point_cap / m)
      throw resource_limit("ifs: maps^depth exceeds the point cap");
    total *= m;
  }

  PointSet out;
  out.dim = spec.dim;
  out.coords.reserve(total * spec.dim);

  std::vector<std::size_t> word(static_cast<std::size_t>(depth), 0);
  std::vector<double> x(spec.dim), y(spec.dim);
  for (std::size_t p = 0; p < total; ++p) {
    std::fill(x.begin(), x.end(), 0.0);
    for (int k = depth - 1; k >= 0; --k) {
      detail::apply_map(spec.maps[word[static_cast<std::size_t>(k)]], spec.dim,
                        x.data(), y.data());
      x.swap(y);
    }
    out.coords.insert(out.coords.end(), x.begin(), x.end());
    for (int k = depth - 1; k >= 0; --k) {
      auto& digit = word[static_cast<std::size_t>(k)];
      if (++digit < m) break;
      digit = 0;
    }
  }
  return out;
}

// Left endpoints of the depth-th construction stage of the symmetric Cantor
// set in [0,1] with contraction `ratio`: the orbit of 0 under
// {x -> ratio*x, x -> ratio*x + (1-ratio)}.  Output is sorted ascending.
inline PointSet generate_cantor(double ratio, int depth,
                                std::size_t point_cap = kDefaultPointCap) {
  if (!(ratio > 0.0 && ratio <= 0.5))
    throw invalid_parameter("cantor: ratio must lie in (0, 1/2]");
  IfsSpec spec;
  spec.dim = 1;
  spec.maps.resize(2);
  spec.maps[0].ratio = ratio;
  spec.maps[0].offset = {0.0};
  spec.maps[1].ratio = ratio;
  spec.maps[1].offset = {1.0 - ratio};
  return generate_ifs(spec, depth, point_cap);
}

// `count` evenly spaced points on [0,1], endpoints included.
inline PointSet make_segment(std::size_t count) {
  if (count < 2) throw invalid_parameter("segment: need at least two points");
  PointSet out;
  out.dim = 1;
  out.coords.resize(count);
  const double step = 1.0 / static_cast<double>(count - 1);
  for (std::size_t i = 0; i < count; ++i)
    out.coords[i] = static_cast<double>(i) * step;
  return out;
}

// Cartesian product; dims add, order is a-major (pair (i,j) lands at index
// i*b.count()+j).
inline PointSet product_set(const PointSet& a, const PointSet& b,
                            std::size_t point_cap = kDefaultPointCap) {
  if (a.count() == 0 || b.count() == 0)
    throw invalid_parameter("product: factors must be nonempty");
  if (a.count() > point_cap / b.count())
    throw resource_limit("product: |a|*|b| exceeds the point cap");
  PointSet out;
  out.dim = a.dim + b.dim;
  out.coords.reserve(a.count() * b.count() * out.dim);
  for (std::size_t i = 0; i < a.count(); ++i)
    for (std::size_t j = 0; j < b.count(); ++j) {
      out.coords.insert(out.coords.end(), a.point(i), a.point(i) + a.dim);
      out.coords.insert(out.coords.end(), b.point(j), b.point(j) + b.dim);
    }
  return out;
}

inline PointSet random_box_sample(std::size_t dim, std::size_t count,
                                  Rng& rng) {
  if (dim == 0 || count == 0)
    throw invalid_parameter("random sample: dim and count must be positive");
  PointSet out;
  out.dim = dim;
  out.coords.resize(dim * count);
  for (double& c : out.coords) c = rng.uniform01();
  return out;
}

// Exact max pairwise distance; quadratic scan, fine at the set sizes the
// solvers accept.
inline double diameter(const PointSet& e) {
  const std::size_t n = e.count();
  if (n == 0) throw invalid_parameter("diameter: empty set");
  double best = 0.0;
  for (std::size_t i = 0; i + 1 < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) {
      double acc = 0.0;
      const double* a = e.point(i);
      const double* b = e.point(j);
      for (std::size_t k = 0; k < e.dim; ++k) {
        const double d = a[k] - b[k];
        acc += d * d;
      }
      best = std::max(best, acc);
    }
  return std::sqrt(best);
}

// Smallest nonzero pairwise distance.  Exact duplicates are skipped (the
// capacity path merges them anyway); 0 comes back only if all points
// coincide.  Sweep over the first coordinate prunes most pairs; degenerate
// inputs fall back toward the quadratic worst case.
inline double min_gap(const PointSet& e) {
  const std::size_t n = e.count();
  if (n < 2) throw invalid_parameter("min gap: need at least two points");
  std::vector<std::uint32_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::uint32_t a, std::uint32_t b) {
    return e.coords[a * e.dim] < e.coords[b * e.dim];
  });
  double best = std::numeric_limits<double>::infinity();
  bool duplicate = false;
  for (std::size_t i = 0; i + 1 < n; ++i) {
    const double* a = e.point(order[i]);
    for (std::size_t j = i + 1; j < n; ++j) {
      const double* b = e.point(order[j]);
      const double dx = b[0] - a[0];
      if (dx * dx >= best) break;
      double acc = 0.0;
      for (std::size_t k = 0; k < e.dim; ++k) {
        const double d = a[k] - b[k];
        acc += d * d;
      }
      if (acc == 0.0)
        duplicate = true;
      else
        best = std::min(best, acc);
    }
  }
  if (duplicate && !std::isfinite(best)) return 0.0;
  return std::isfinite(best) ? std::sqrt(best) : 0.0;
}

// Keep every ceil(count/cap)-th point of the canonical order.  Used to bring
// oversized sets under the dense-solver cap without shuffling structure.
inline PointSet subsample(const PointSet& e, std::size_t cap) {
  if (cap == 0) throw invalid_parameter("subsample: cap must be positive");
  const std::size_t n = e.count();
  if (n <= cap) return e;
  const std::size_t stride = (n + cap - 1) / cap;
  PointSet out;
  out.dim = e.dim;
  for (std::size_t i = 0; i < n; i += stride)
    out.coords.insert(out.coords.end(), e.point(i), e.point(i) + e.dim);
  return out;
}

}  // namespace capdim
