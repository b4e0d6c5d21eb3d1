#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

#include "capdim/errors.hpp"
#include "capdim/pointset.hpp"
#include "capdim/psi.hpp"

namespace capdim {

// Radial kernel selector.  `phi` is the capped inverse power
// min{1, (r/|x|)^s}; `psi` is its Gaussian-smoothed cousin (see psi.hpp),
// defined for 0 < s < n only.
struct KernelSpec {
  enum class Family { phi, psi };
  Family family = Family::phi;
  double s = 1.0;
  double r = 1.0;
};

inline void validate(const KernelSpec& spec) {
  if (!(spec.s > 0.0)) throw invalid_parameter("kernel: s must be positive");
  if (!(spec.r > 0.0)) throw invalid_parameter("kernel: r must be positive");
}

inline double phi_radial(double s, double r, double dist) {
  if (dist <= r) return 1.0;
  const double t = r / dist;
  if (s == 1.0) return t;
  if (s == 2.0) return t * t;
  if (s == 0.5) return std::sqrt(t);
  return std::pow(t, s);
}

// Unit-scale Gaussian bump e(x) = exp(-|x|^2 / 2), at scale w: e(x / w).
inline double gauss(const double* x, std::size_t n, double scale = 1.0) {
  double acc = 0.0;
  for (std::size_t j = 0; j < n; ++j) acc += x[j] * x[j];
  return std::exp(-0.5 * acc / (scale * scale));
}

inline double kernel_radial(const KernelSpec& spec, std::size_t n,
                            double dist) {
  validate(spec);
  if (spec.family == KernelSpec::Family::phi)
    return phi_radial(spec.s, spec.r, dist);
  return psi_evaluator(n, spec.s)(dist / spec.r);
}

inline double phi(const KernelSpec& spec, const double* x, std::size_t n) {
  validate(spec);
  double acc = 0.0;
  for (std::size_t j = 0; j < n; ++j) acc += x[j] * x[j];
  return phi_radial(spec.s, spec.r, std::sqrt(acc));
}

inline double psi(const KernelSpec& spec, const double* x, std::size_t n) {
  validate(spec);
  double acc = 0.0;
  for (std::size_t j = 0; j < n; ++j) acc += x[j] * x[j];
  return psi_evaluator(n, spec.s)(std::sqrt(acc) / spec.r);
}

// Dense symmetric matrix, row-major, full square storage so solver column
// reads stay contiguous.
struct KernelMatrix {
  std::size_t n = 0;
  std::vector<double> a;

  double at(std::size_t i, std::size_t j) const { return a[i * n + j]; }
  const double* row(std::size_t i) const { return a.data() + i * n; }
};

struct DistanceMatrix {
  std::size_t n = 0;
  std::vector<double> d;

  double at(std::size_t i, std::size_t j) const { return d[i * n + j]; }
};

inline DistanceMatrix assemble_distances(const PointSet& e) {
  const std::size_t n = e.count();
  if (n == 0) throw invalid_parameter("distances: empty set");
  DistanceMatrix m;
  m.n = n;
  m.d.assign(n * n, 0.0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) {
      const double dist = distance(e.point(i), e.point(j), e.dim);
      m.d[i * n + j] = dist;
      m.d[j * n + i] = dist;
    }
  return m;
}

// Each unordered pair is evaluated once and mirrored, so the result is
// symmetric bit for bit.
inline KernelMatrix assemble_matrix(const DistanceMatrix& dm,
                                    const KernelSpec& spec, std::size_t dim) {
  validate(spec);
  const std::size_t n = dm.n;
  KernelMatrix k;
  k.n = n;
  k.a.assign(n * n, 0.0);
  if (spec.family == KernelSpec::Family::phi) {
    const double diag = 1.0;
    for (std::size_t i = 0; i < n; ++i) {
      k.a[i * n + i] = diag;
      for (std::size_t j = i + 1; j < n; ++j) {
        const double v = phi_radial(spec.s, spec.r, dm.d[i * n + j]);
        k.a[i * n + j] = v;
        k.a[j * n + i] = v;
      }
    }
  } else {
    const PsiRadial& ev = psi_evaluator(dim, spec.s);
    const double diag = ev(0.0);
    for (std::size_t i = 0; i < n; ++i) {
      k.a[i * n + i] = diag;
      for (std::size_t j = i + 1; j < n; ++j) {
        const double v = ev(dm.d[i * n + j] / spec.r);
        k.a[i * n + j] = v;
        k.a[j * n + i] = v;
      }
    }
  }
  return k;
}

inline KernelMatrix assemble_matrix(const PointSet& e, const KernelSpec& spec) {
  return assemble_matrix(assemble_distances(e), spec, e.dim);
}

}  // namespace capdim
