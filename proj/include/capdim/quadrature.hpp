#pragma once

#include <cmath>
#include <cstddef>
#include <queue>
#include <vector>

#include "capdim/errors.hpp"

namespace capdim {

// Gauss-Legendre rule on [-1,1], nodes found by Newton iteration on P_k.
// Computed once per order and cached; orders used here are small.
struct GaussRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};

inline const GaussRule& gauss_legendre(std::size_t k) {
  static std::vector<GaussRule> cache(129);
  if (k == 0 || k > 128) throw invalid_parameter("gauss rule: bad order");
  GaussRule& rule = cache[k];
  if (!rule.nodes.empty()) return rule;

  GaussRule fresh;
  fresh.nodes.resize(k);
  fresh.weights.resize(k);
  const std::size_t half = (k + 1) / 2;
  for (std::size_t i = 0; i < half; ++i) {
    double x = std::cos(3.14159265358979323846 * (static_cast<double>(i) + 0.75) /
                        (static_cast<double>(k) + 0.5));
    double dp = 0.0;
    for (int iter = 0; iter < 100; ++iter) {
      double p0 = 1.0, p1 = x;
      for (std::size_t j = 2; j <= k; ++j) {
        const double pj = ((2.0 * static_cast<double>(j) - 1.0) * x * p1 -
                           (static_cast<double>(j) - 1.0) * p0) /
                          static_cast<double>(j);
        p0 = p1;
        p1 = pj;
      }
      dp = static_cast<double>(k) * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::fabs(dx) < 1e-15) break;
    }
    fresh.nodes[i] = -x;
    fresh.nodes[k - 1 - i] = x;
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    fresh.weights[i] = w;
    fresh.weights[k - 1 - i] = w;
  }
  rule = fresh;
  return rule;
}

template <typename F>
double fixed_gauss(F&& f, double a, double b, std::size_t order) {
  const GaussRule& rule = gauss_legendre(order);
  const double mid = 0.5 * (a + b);
  const double hw = 0.5 * (b - a);
  double acc = 0.0;
  for (std::size_t i = 0; i < rule.nodes.size(); ++i)
    acc += rule.weights[i] * f(mid + hw * rule.nodes[i]);
  return acc * hw;
}

struct QuadResult {
  double value = 0.0;
  double abs_error = 0.0;
  std::size_t intervals = 0;
  bool converged = false;
};

// Globally adaptive bisection.  Each interval carries its 15-point estimate
// and the two half-interval estimates; the difference drives a worst-first
// heap.  Endpoint singularities that are integrable converge too, just with
// more splits, so callers with known singularities should substitute them
// away first.
template <typename F>
QuadResult integrate_adaptive(F&& f, double a, double b, double rel_tol,
                              std::size_t max_intervals = 4000) {
  constexpr std::size_t kOrder = 15;
  struct Node {
    double a, b;
    double val;        // estimate over [a,b]
    double left, right;  // estimates over the two halves
    double err;        // |left + right - val|
  };
  auto make_node = [&](double lo, double hi) {
    Node nd;
    nd.a = lo;
    nd.b = hi;
    nd.val = fixed_gauss(f, lo, hi, kOrder);
    const double mid = 0.5 * (lo + hi);
    nd.left = fixed_gauss(f, lo, mid, kOrder);
    nd.right = fixed_gauss(f, mid, hi, kOrder);
    nd.err = std::fabs(nd.left + nd.right - nd.val);
    return nd;
  };
  auto worse = [](const Node& x, const Node& y) { return x.err < y.err; };
  std::priority_queue<Node, std::vector<Node>, decltype(worse)> heap(worse);

  QuadResult res;
  if (!(b > a)) {
    res.converged = true;
    return res;
  }

  double total = 0.0, total_err = 0.0;
  const std::size_t seeds = 8;
  for (std::size_t i = 0; i < seeds; ++i) {
    const double lo = a + (b - a) * static_cast<double>(i) / seeds;
    const double hi = a + (b - a) * static_cast<double>(i + 1) / seeds;
    Node nd = make_node(lo, hi);
    total += nd.left + nd.right;
    total_err += nd.err;
    heap.push(nd);
  }

  std::size_t count = seeds;
  while (total_err > rel_tol * std::fabs(total) &&
         total_err > 1e-300 && count < max_intervals) {
    Node worst = heap.top();
    heap.pop();
    total -= worst.left + worst.right;
    total_err -= worst.err;
    const double mid = 0.5 * (worst.a + worst.b);
    for (const auto& range : {std::pair{worst.a, mid}, std::pair{mid, worst.b}}) {
      Node nd = make_node(range.first, range.second);
      total += nd.left + nd.right;
      total_err += nd.err;
      heap.push(nd);
    }
    ++count;
  }

  res.value = total;
  res.abs_error = total_err;
  res.intervals = count;
  res.converged = total_err <= rel_tol * std::fabs(total) || total_err <= 1e-300;
  return res;
}

}  // namespace capdim
