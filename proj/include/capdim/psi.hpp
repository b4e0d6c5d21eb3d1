#pragma once

#include <bit>
#include <cmath>
#include <cstdint>
#include <memory>
#include <mutex>
#include <unordered_map>

#include "capdim/errors.hpp"
#include "capdim/quadrature.hpp"

namespace capdim {

// Smoothed radial kernel: the convolution of |y|^-s with the unit Gaussian
// e(y) = exp(-|y|^2 / 2), evaluated at x/r.  Only the r = 1 profile is ever
// integrated; all other scales reduce to it by substituting x/r.
//
// With rho = |x| and n >= 2 the convolution collapses to
//
//   psi(rho) = omega * Int_0^inf t^(n-1-s) exp(-(rho-t)^2/2) A(t*rho) dt,
//
// where omega is the surface area of S^(n-2) and
//
//   A(k) = Int_0^pi exp(-k (1 - cos theta)) sin^(n-2) theta dtheta.
//
// Writing the angular part against (1 - cos theta) keeps every factor in
// [0,1], so nothing overflows even at rho ~ 1e3 where the raw sphere integral
// would need exp(1e6).  For n = 1 the "sphere" is two points and A(k)
// degenerates to 1 + exp(-2k).
class PsiRadial {
 public:
  PsiRadial(std::size_t n, double s, double rel_tol = 1e-8)
      : n_(n), s_(s), rel_tol_(rel_tol) {
    if (n == 0) throw invalid_parameter("psi: dimension must be positive");
    if (!(s > 0.0) || !(s < static_cast<double>(n)))
      throw invalid_parameter("psi: requires 0 < s < n");
    if (n_ >= 2) {
      const double nn = static_cast<double>(n_);
      omega_ = 2.0 * std::pow(3.14159265358979323846, 0.5 * (nn - 1.0)) /
               std::tgamma(0.5 * (nn - 1.0));
    } else {
      omega_ = 1.0;
    }
  }

  std::size_t dim() const { return n_; }
  double exponent() const { return s_; }

  // psi at radius rho for the r = 1 kernel.  Values are memoized on the exact
  // argument bits; structured sets repeat distances heavily, so assembly cost
  // amortizes.
  double operator()(double rho) const {
    if (!(rho >= 0.0)) throw invalid_parameter("psi: radius must be >= 0");
    const std::uint64_t key = std::bit_cast<std::uint64_t>(rho);
    {
      std::lock_guard<std::mutex> lock(mutex_);
      auto it = memo_.find(key);
      if (it != memo_.end()) return it->second;
    }
    const double value = evaluate(rho);
    std::lock_guard<std::mutex> lock(mutex_);
    memo_.emplace(key, value);
    return value;
  }

 private:
  // Angular factor A(k); fixed-order nodes on [0, theta_cut] where the
  // integrand is not yet negligible (exp(-60) and below is dropped).
  double angular(double k) const {
    if (n_ == 1) return 1.0 + std::exp(-2.0 * k);
    const double theta_cut =
        (k <= 30.0) ? 3.14159265358979323846 : std::acos(1.0 - 60.0 / k);
    const double nm2 = static_cast<double>(n_) - 2.0;
    return fixed_gauss(
        [&](double theta) {
          const double c = std::cos(theta);
          const double sn = std::sin(theta);
          const double base = std::exp(-k * (1.0 - c));
          return nm2 == 0.0 ? base : base * std::pow(sn, nm2);
        },
        0.0, theta_cut, 64);
  }

  double radial_integrand(double t, double rho) const {
    const double dt = rho - t;
    return std::pow(t, static_cast<double>(n_) - 1.0 - s_) *
           std::exp(-0.5 * dt * dt) * angular(t * rho);
  }

  double evaluate(double rho) const {
    const double t_hi = rho + 13.0;
    const double t_lo = rho > 14.0 ? rho - 13.0 : 0.0;
    const double alpha = static_cast<double>(n_) - 1.0 - s_;

    double value = 0.0, err = 0.0;
    std::size_t pieces = 0;
    auto accumulate = [&](const QuadResult& q) {
      value += q.value;
      err += q.abs_error;
      pieces += q.intervals;
      if (!q.converged)
        throw numerical_error("psi: radial quadrature did not converge",
                              q.abs_error);
    };

    if (t_lo > 0.0 || alpha >= 0.0) {
      accumulate(integrate_adaptive(
          [&](double t) { return radial_integrand(t, rho); }, t_lo, t_hi,
          rel_tol_));
    } else {
      // t^alpha with alpha in (-1, 0): substitute t = u^p so the integrand
      // vanishes linearly at u = 0 instead of blowing up at t = 0.
      const double p = 2.0 / (static_cast<double>(n_) - s_);
      const double t_split = std::min(1.0, t_hi);
      accumulate(integrate_adaptive(
          [&](double u) {
            const double t = std::pow(u, p);
            const double dt = rho - t;
            return p * u * std::exp(-0.5 * dt * dt) * angular(t * rho);
          },
          0.0, std::pow(t_split, 1.0 / p), rel_tol_));
      if (t_split < t_hi)
        accumulate(integrate_adaptive(
            [&](double t) { return radial_integrand(t, rho); }, t_split, t_hi,
            rel_tol_));
    }

    const double total = omega_ * value;
    if (!(total > 0.0) || !std::isfinite(total))
      throw numerical_error("psi: non-finite radial integral", err);
    return total;
  }

  std::size_t n_;
  double s_;
  double rel_tol_;
  double omega_;
  mutable std::mutex mutex_;
  mutable std::unordered_map<std::uint64_t, double> memo_;
};

// Shared evaluators keyed by (n, s); repeated matrix assemblies for the same
// kernel reuse one memo table.
inline const PsiRadial& psi_evaluator(std::size_t n, double s,
                                      double rel_tol = 1e-8) {
  struct Key {
    std::size_t n;
    std::uint64_t s_bits;
    std::uint64_t tol_bits;
    bool operator==(const Key&) const = default;
  };
  struct KeyHash {
    std::size_t operator()(const Key& k) const {
      std::uint64_t h = k.n * 0x9e3779b97f4a7c15ull;
      h ^= k.s_bits + 0x9e3779b97f4a7c15ull + (h << 6) + (h >> 2);
      h ^= k.tol_bits + 0x9e3779b97f4a7c15ull + (h << 6) + (h >> 2);
      return static_cast<std::size_t>(h);
    }
  };
  static std::mutex mu;
  static std::unordered_map<Key, std::unique_ptr<PsiRadial>, KeyHash> table;
  const Key key{n, std::bit_cast<std::uint64_t>(s),
                std::bit_cast<std::uint64_t>(rel_tol)};
  std::lock_guard<std::mutex> lock(mu);
  auto it = table.find(key);
  if (it == table.end())
    it = table.emplace(key, std::make_unique<PsiRadial>(n, s, rel_tol)).first;
  return *it->second;
}

}  // namespace capdim
