#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <vector>

#include "capdim/errors.hpp"
#include "capdim/kernels.hpp"
#include "capdim/pointset.hpp"
#include "capdim/rng.hpp"

namespace capdim {

// m-dimensional linear subspace of R^n held as an orthonormal basis,
// column-major: column j occupies basis[j*n .. j*n+n).
struct Subspace {
  std::size_t n = 0;
  std::size_t m = 0;
  std::vector<double> basis;

  const double* column(std::size_t j) const { return basis.data() + j * n; }
};

namespace detail {

// Modified Gram-Schmidt with a second pass; returns false on rank collapse.
inline bool orthonormalize(std::size_t n, std::size_t m,
                           std::vector<double>& cols) {
  for (std::size_t j = 0; j < m; ++j) {
    double* vj = cols.data() + j * n;
    for (int pass = 0; pass < 2; ++pass)
      for (std::size_t k = 0; k < j; ++k) {
        const double* qk = cols.data() + k * n;
        double dot = 0.0;
        for (std::size_t i = 0; i < n; ++i) dot += qk[i] * vj[i];
        for (std::size_t i = 0; i < n; ++i) vj[i] -= dot * qk[i];
      }
    double norm = 0.0;
    for (std::size_t i = 0; i < n; ++i) norm += vj[i] * vj[i];
    norm = std::sqrt(norm);
    if (norm < 1e-8) return false;
    for (std::size_t i = 0; i < n; ++i) vj[i] /= norm;
  }
  return true;
}

}  // namespace detail

// Rotation-invariant draw: orthonormalize an n x m standard Gaussian frame.
// A rank-deficient draw (measure zero, but finite-precision) is retried with
// the seed bumped by one; `redraws` reports how often that happened.
// m == n is the one-point Grassmannian, so the basis is pinned to the
// identity and projection is exactly the identity map.
inline Subspace sample_subspace(std::size_t n, std::size_t m,
                                std::uint64_t seed, int* redraws = nullptr) {
  if (m < 1 || m > n) throw invalid_parameter("subspace: need 1 <= m <= n");
  Subspace v;
  v.n = n;
  v.m = m;
  if (redraws != nullptr) *redraws = 0;
  if (m == n) {
    v.basis.assign(n * n, 0.0);
    for (std::size_t j = 0; j < n; ++j) v.basis[j * n + j] = 1.0;
    return v;
  }
  for (int attempt = 0;; ++attempt) {
    Rng rng = Rng(seed + static_cast<std::uint64_t>(attempt)).child("frame");
    v.basis.resize(n * m);
    for (double& c : v.basis) c = rng.normal();
    if (detail::orthonormalize(n, m, v.basis)) break;
    if (redraws != nullptr) ++(*redraws);
    if (attempt > 64)
      throw numerical_error("subspace: repeated rank-deficient draws", 0.0);
  }
  return v;
}

// Coordinates of the orthogonal projection in the subspace basis.
inline void project_point(const Subspace& v, const double* x, double* out) {
  for (std::size_t j = 0; j < v.m; ++j) {
    const double* col = v.column(j);
    double dot = 0.0;
    for (std::size_t i = 0; i < v.n; ++i) dot += col[i] * x[i];
    out[j] = dot;
  }
}

inline PointSet project(const PointSet& e, const Subspace& v) {
  if (e.dim != v.n) throw invalid_parameter("project: dimension mismatch");
  PointSet out;
  out.dim = v.m;
  out.coords.resize(e.count() * v.m);
  for (std::size_t i = 0; i < e.count(); ++i)
    project_point(v, e.point(i), out.point(i));
  return out;
}

// Squared distance from x to the subspace; the clamp guards the roundoff
// case |B^T x| marginally above |x|.
inline double perp_norm2(const Subspace& v, const double* x) {
  double full = 0.0;
  for (std::size_t i = 0; i < v.n; ++i) full += x[i] * x[i];
  double proj = 0.0;
  for (std::size_t j = 0; j < v.m; ++j) {
    const double* col = v.column(j);
    double dot = 0.0;
    for (std::size_t i = 0; i < v.n; ++i) dot += col[i] * x[i];
    proj += dot * dot;
  }
  return std::max(0.0, full - proj);
}

// Push-forward of a weighted sample where each point keeps only the Gaussian
// mass of its offset from the subspace: weight_i = mu_i * exp(-|x_perp|^2/2).
// Total mass is at most 1 and equals 1 exactly when the set lies inside V.
struct WeightedProjection {
  PointSet points;
  std::vector<double> weights;

  double mass() const {
    double acc = 0.0;
    for (double w : weights) acc += w;
    return acc;
  }
};

inline WeightedProjection weighted_projection(const PointSet& e,
                                              const std::vector<double>& mu,
                                              const Subspace& v) {
  if (e.dim != v.n)
    throw invalid_parameter("weighted projection: dimension mismatch");
  if (mu.size() != e.count())
    throw invalid_parameter("weighted projection: weight count mismatch");
  WeightedProjection out;
  out.points = project(e, v);
  out.weights.resize(e.count());
  for (std::size_t i = 0; i < e.count(); ++i)
    out.weights[i] = mu[i] * std::exp(-0.5 * perp_norm2(v, e.point(i)));
  return out;
}

struct TubeEstimate {
  double p_hat = 0.0;
  double std_error = 0.0;
  std::size_t trials = 0;
};

// Monte Carlo frequency of |proj_V x| <= r over random subspaces.  Trials are
// drawn in fixed-size chunks with per-chunk child seeds, so the estimate does
// not depend on how the chunks might be scheduled.
inline TubeEstimate tube_probability(const std::vector<double>& x,
                                     std::size_t m, double r,
                                     std::size_t trials, std::uint64_t seed) {
  const std::size_t n = x.size();
  if (n == 0) throw invalid_parameter("tube: empty direction vector");
  if (m < 1 || m > n) throw invalid_parameter("tube: need 1 <= m <= n");
  if (trials < 1000) throw invalid_parameter("tube: need at least 1000 trials");
  double norm2 = 0.0;
  for (double c : x) norm2 += c * c;
  if (!(norm2 > 0.0)) throw invalid_parameter("tube: x must be nonzero");
  if (!(r > 0.0)) throw invalid_parameter("tube: r must be positive");

  const double r2 = r * r;
  constexpr std::size_t kChunk = 4096;
  const Rng root = Rng(seed).child("tube-trials");
  std::size_t hits = 0;
  std::vector<double> frame(n * m);
  std::size_t done = 0;
  for (std::size_t chunk = 0; done < trials; ++chunk) {
    Rng rng = root.child(chunk);
    const std::size_t take = std::min(kChunk, trials - done);
    for (std::size_t t = 0; t < take; ++t) {
      for (;;) {
        for (double& c : frame) c = rng.normal();
        if (detail::orthonormalize(n, m, frame)) break;
      }
      double proj2 = 0.0;
      for (std::size_t j = 0; j < m; ++j) {
        const double* col = frame.data() + j * n;
        double dot = 0.0;
        for (std::size_t i = 0; i < n; ++i) dot += col[i] * x[i];
        proj2 += dot * dot;
      }
      if (proj2 <= r2) ++hits;
    }
    done += take;
  }

  TubeEstimate est;
  est.trials = trials;
  est.p_hat = static_cast<double>(hits) / static_cast<double>(trials);
  est.std_error =
      std::sqrt(est.p_hat * (1.0 - est.p_hat) / static_cast<double>(trials));
  return est;
}

// Tube probability against the capped inverse-power kernel with exponent m,
// across a grid of |x| / r ratios.  The two quantities are expected to agree
// up to dimensional constants; the observed band is reported, not assumed.
struct TubeComparabilityRow {
  double ratio = 0.0;
  double p_hat = 0.0;
  double std_error = 0.0;
  double phi_value = 0.0;
  double ratio_to_phi = 0.0;
};

struct TubeComparability {
  std::vector<TubeComparabilityRow> rows;
  double band_min = 0.0;
  double band_max = 0.0;
};

inline TubeComparability verify_tube_comparability(
    std::size_t n, std::size_t m, const std::vector<double>& ratios,
    std::size_t trials, std::uint64_t seed) {
  if (ratios.empty()) throw invalid_parameter("tube band: empty ratio grid");
  TubeComparability out;
  out.rows.reserve(ratios.size());
  bool first = true;
  for (std::size_t idx = 0; idx < ratios.size(); ++idx) {
    const double rho = ratios[idx];
    if (!(rho > 0.0)) throw invalid_parameter("tube band: ratios must be > 0");
    std::vector<double> x(n, 0.0);
    x[0] = rho;
    TubeEstimate est = tube_probability(
        x, m, 1.0, trials, Rng(seed).child("tube-band").child(idx).seed());
    TubeComparabilityRow row;
    row.ratio = rho;
    row.p_hat = est.p_hat;
    row.std_error = est.std_error;
    row.phi_value = phi_radial(static_cast<double>(m), 1.0, rho);
    row.ratio_to_phi = row.phi_value > 0.0 ? est.p_hat / row.phi_value : 0.0;
    if (first || row.ratio_to_phi < out.band_min)
      out.band_min = row.ratio_to_phi;
    if (first || row.ratio_to_phi > out.band_max)
      out.band_max = row.ratio_to_phi;
    first = false;
    out.rows.push_back(row);
  }
  return out;
}

}  // namespace capdim
