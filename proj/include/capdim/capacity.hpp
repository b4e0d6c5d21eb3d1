#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <limits>
#include <unordered_map>
#include <vector>

#include "capdim/errors.hpp"
#include "capdim/kernels.hpp"
#include "capdim/pointset.hpp"
#include "capdim/rng.hpp"

namespace capdim {

// Probability weights on the points of a set, same indexing as the PointSet
// they were solved on.
struct DiscreteMeasure {
  std::vector<double> weights;
};

inline void validate(const DiscreteMeasure& m) {
  double sum = 0.0;
  for (double w : m.weights) {
    if (w < 0.0) throw invalid_parameter("measure: negative weight");
    sum += w;
  }
  if (std::fabs(sum - 1.0) > 1e-12)
    throw invalid_parameter("measure: weights must sum to 1");
}

struct SolveOptions {
  double tol = 1e-8;
  std::size_t max_iter = 100000;
  // Number of starts per solve: the first is uniform (or the caller's warm
  // start, which is tried in addition), the rest are seeded random simplex
  // points.  The best certified solution wins.
  int restarts = 1;
  std::uint64_t seed = 0;
  double weight_floor = 1e-10;
};

struct CapacityResult {
  double r = 0.0;
  double s = 0.0;
  double capacity = 0.0;
  double min_energy = 0.0;
  DiscreteMeasure equilibrium;
  double potential_min_on_support = 0.0;
  double potential_max_off_support_defect = 0.0;
  double kkt_residual = 0.0;
  std::size_t iterations = 0;
  bool converged = false;
  std::size_t support_size = 0;
};

inline double energy(const KernelMatrix& k, const DiscreteMeasure& m) {
  const std::size_t n = k.n;
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double* row = k.row(i);
    double pi = 0.0;
    for (std::size_t j = 0; j < n; ++j) pi += row[j] * m.weights[j];
    acc += m.weights[i] * pi;
  }
  return acc;
}

// Potential of the measure at every point: (K w)_i.
inline std::vector<double> potential(const KernelMatrix& k,
                                     const DiscreteMeasure& m) {
  const std::size_t n = k.n;
  std::vector<double> p(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    const double* row = k.row(i);
    double acc = 0.0;
    for (std::size_t j = 0; j < n; ++j) acc += row[j] * m.weights[j];
    p[i] = acc;
  }
  return p;
}

namespace detail {

struct SolverRun {
  std::vector<double> w;
  std::vector<double> p;
  double energy = 0.0;
  double kkt = 0.0;
  double pot_min_support = 0.0;
  double defect_below = 0.0;
  std::size_t support = 0;
  std::size_t iterations = 0;
  bool converged = false;
};

inline void refresh_potential(const KernelMatrix& k,
                              const std::vector<double>& w,
                              std::vector<double>& p) {
  const std::size_t n = k.n;
  for (std::size_t i = 0; i < n; ++i) {
    const double* row = k.row(i);
    double acc = 0.0;
    for (std::size_t j = 0; j < n; ++j) acc += row[j] * w[j];
    p[i] = acc;
  }
}

// Measures the optimality certificate: the potential must not dip below the
// minimal energy anywhere, and must equal it on the support.
inline void certificate(const std::vector<double>& w,
                        const std::vector<double>& p, double floor,
                        SolverRun& run) {
  const std::size_t n = w.size();
  double en = 0.0;
  for (std::size_t i = 0; i < n; ++i) en += w[i] * p[i];
  double p_min_all = p[0];
  double support_dev = 0.0;
  double pot_min_support = 0.0;
  bool first_support = true;
  std::size_t support = 0;
  for (std::size_t i = 0; i < n; ++i) {
    p_min_all = std::min(p_min_all, p[i]);
    if (w[i] > floor) {
      ++support;
      support_dev = std::max(support_dev, std::fabs(p[i] - en));
      if (first_support || p[i] < pot_min_support) {
        pot_min_support = p[i];
        first_support = false;
      }
    }
  }
  run.energy = en;
  run.defect_below = std::max(0.0, en - p_min_all);
  run.kkt = std::max(run.defect_below, support_dev);
  run.pot_min_support = pot_min_support;
  run.support = support;
}

// Solves the stationarity conditions on a fixed support: the potential is a
// single level there and the weights sum to one.  Bordered dense system,
// Gaussian elimination with partial pivoting; false when a pivot collapses
// (duplicate or numerically dependent rows).
inline bool solve_reduced(const KernelMatrix& k,
                          const std::vector<std::size_t>& sup,
                          std::vector<double>& w_sup, double& level) {
  const std::size_t m = sup.size();
  const std::size_t dim = m + 1;
  std::vector<double> a(dim * dim);
  std::vector<double> x(dim, 0.0);
  for (std::size_t i = 0; i < m; ++i) {
    double* arow = &a[i * dim];
    for (std::size_t j = 0; j < m; ++j) arow[j] = k.at(sup[i], sup[j]);
    arow[m] = -1.0;
  }
  for (std::size_t j = 0; j < m; ++j) a[m * dim + j] = 1.0;
  a[m * dim + m] = 0.0;
  x[m] = 1.0;

  for (std::size_t col = 0; col < dim; ++col) {
    std::size_t piv = col;
    double best = std::fabs(a[col * dim + col]);
    for (std::size_t row = col + 1; row < dim; ++row) {
      const double v = std::fabs(a[row * dim + col]);
      if (v > best) {
        best = v;
        piv = row;
      }
    }
    if (!(best > 1e-305)) return false;
    if (piv != col) {
      for (std::size_t j = col; j < dim; ++j)
        std::swap(a[piv * dim + j], a[col * dim + j]);
      std::swap(x[piv], x[col]);
    }
    const double inv = 1.0 / a[col * dim + col];
    for (std::size_t row = col + 1; row < dim; ++row) {
      const double f = a[row * dim + col] * inv;
      if (f == 0.0) continue;
      a[row * dim + col] = 0.0;
      for (std::size_t j = col + 1; j < dim; ++j)
        a[row * dim + j] -= f * a[col * dim + j];
      x[row] -= f * x[col];
    }
  }
  for (std::size_t col = dim; col-- > 0;) {
    double acc = x[col];
    for (std::size_t j = col + 1; j < dim; ++j) acc -= a[col * dim + j] * x[j];
    x[col] = acc / a[col * dim + col];
  }
  w_sup.assign(x.begin(), x.begin() + m);
  level = x[m];
  return true;
}

// Active-set finisher.  The descent loop is good at locating the support but
// slow at balancing the last digits of the weights, so once a candidate
// support is in hand we solve its stationarity system directly and walk the
// support: prune atoms whose solved weight goes negative, add an atom at any
// potential dip, and when a just-added atom collapses to negative weight try
// evicting its strongest kernel neighbour instead (the truncated kernel is
// not positive definite, so the stationarity solve can land on a saddle when
// two atoms share a flat top; the swap is the move that escapes it).  Accept
// only if the full certificate holds.  On success `run` carries the finished
// state; on failure the caller's iterate is left untouched.
inline bool try_polish(const KernelMatrix& k, const SolveOptions& opts,
                       const std::vector<double>& w_seed, SolverRun& run,
                       std::size_t max_support) {
  const std::size_t n = k.n;
  double w_max = 0.0;
  for (double v : w_seed) w_max = std::max(w_max, v);
  const double thr = std::max(opts.weight_floor, 1e-8 * w_max);
  std::vector<std::size_t> sup;
  for (std::size_t i = 0; i < n; ++i)
    if (w_seed[i] > thr) sup.push_back(i);
  if (sup.empty() || sup.size() > max_support) return false;

  std::vector<std::size_t> fresh;
  // Shelved dips: atoms that refused to stay in the support, each with the
  // round at which it may be tried again.
  std::vector<std::pair<std::size_t, int>> tabu;
  int cur_round = 0;
  const auto is_fresh = [&fresh](std::size_t i) {
    return std::find(fresh.begin(), fresh.end(), i) != fresh.end();
  };
  const auto is_tabu = [&tabu, &cur_round](std::size_t i) {
    for (const auto& [idx, until] : tabu)
      if (idx == i && until > cur_round) return true;
    return false;
  };
  const auto erase_from = [](std::vector<std::size_t>& v, std::size_t i) {
    v.erase(std::remove(v.begin(), v.end(), i), v.end());
  };

  std::vector<double> ws;
  std::vector<double> w(n, 0.0);
  std::vector<double> p(n, 0.0);
  SolverRun cand;
  double level = 0.0;
  double cur_en = 0.0;
  bool have_en = false;
  double best_en = 0.0;
  double best_kkt = std::numeric_limits<double>::infinity();
  std::vector<std::size_t> best_sup;
  int stall = 0;
  int restores = 0;
  // Factorizations are billed by cost so that a long streak of cheap slide
  // moves on a small support is not cut short by the same cap that bounds
  // the expensive large-support rounds.
  const double work_budget = 6e9;
  double work = 0.0;
  const auto bill = [&work](std::size_t m) {
    const double md = static_cast<double>(m);
    work += md * md * md / 3.0;
  };

  // Reposition move: a newcomer j and the settled atom sharing its flat top
  // cannot both carry weight, so evict the strongest kernel neighbour and put
  // j in its place.  The trial's stationary level is the energy of a feasible
  // weight vector, so accepting only strict decreases keeps this a ratchet.
  const auto try_slide = [&](std::size_t j) -> bool {
    std::array<std::size_t, 4> nbs{n, n, n, n};
    std::array<double, 3> kvs{-1.0, -1.0, -1.0};
    double light = std::numeric_limits<double>::infinity();
    for (std::size_t idx = 0; idx < sup.size(); ++idx) {
      const std::size_t i = sup[idx];
      if (i == j || is_fresh(i)) continue;
      double kv = k.at(j, i);
      // Weakest plateau-mate: in a degenerate cluster the atom worth
      // displacing is often the faintest one, not the nearest.
      if (kv > 0.999 && idx < ws.size() && ws[idx] < light) {
        light = ws[idx];
        nbs[3] = i;
      }
      std::size_t cand_i = i;
      for (std::size_t slot = 0; slot < kvs.size(); ++slot) {
        if (kv > kvs[slot]) {
          std::swap(kvs[slot], kv);
          std::swap(nbs[slot], cand_i);
        }
      }
    }
    if (nbs[3] == nbs[0] || nbs[3] == nbs[1] || nbs[3] == nbs[2]) nbs[3] = n;
    for (std::size_t nb : nbs) {
      if (nb >= n) continue;
      std::vector<std::size_t> trial;
      trial.reserve(sup.size());
      for (std::size_t i : sup)
        if (i != nb && (i == j || !is_fresh(i))) trial.push_back(i);
      std::vector<double> tws;
      double tlevel = 0.0;
      bill(trial.size());
      if (!solve_reduced(k, trial, tws, tlevel)) continue;
      double tmin = 0.0;
      for (double v : tws) tmin = std::min(tmin, v);
      if (tmin >= -1e-9 && (!have_en || tlevel < cur_en)) {
        sup.swap(trial);
        fresh.clear();
        cur_en = tlevel;
        have_en = true;
        return true;
      }
    }
    // Single evictions exhausted: the newcomer may be wedged between two
    // atoms that jointly cover its plateau, so try evicting pairs.  Worth
    // the extra factorizations only once the endgame is reached.
    if (best_kkt >= 1e-4) return false;
    for (std::size_t a = 0; a + 1 < nbs.size(); ++a) {
      if (nbs[a] >= n) continue;
      for (std::size_t b = a + 1; b < nbs.size(); ++b) {
        if (nbs[b] >= n) continue;
        std::vector<std::size_t> trial;
        trial.reserve(sup.size());
        for (std::size_t i : sup)
          if (i != nbs[a] && i != nbs[b] && (i == j || !is_fresh(i)))
            trial.push_back(i);
        std::vector<double> tws;
        double tlevel = 0.0;
        bill(trial.size());
        if (!solve_reduced(k, trial, tws, tlevel)) continue;
        double tmin = 0.0;
        for (double v : tws) tmin = std::min(tmin, v);
        if (tmin >= -1e-9 && (!have_en || tlevel < cur_en)) {
          sup.swap(trial);
          fresh.clear();
          cur_en = tlevel;
          have_en = true;
          return true;
        }
      }
    }
    return false;
  };
  std::size_t bounce_j = n;
  int bounces = 0;
  for (int round = 0; round < 4000 && work < work_budget; ++round) {
    cur_round = round;
    if (sup.empty() || sup.size() > max_support) return false;
    if (!solve_reduced(k, sup, ws, level)) return false;
    bill(sup.size());
    work += 2.0 * static_cast<double>(n) * static_cast<double>(sup.size());

    std::size_t worst_new = n, worst_old = n;
    double worst_new_v = -1e-12, worst_old_v = -1e-12;
    for (std::size_t idx = 0; idx < ws.size(); ++idx) {
      if (ws[idx] >= -1e-12) continue;
      if (is_fresh(sup[idx])) {
        if (ws[idx] < worst_new_v) {
          worst_new_v = ws[idx];
          worst_new = sup[idx];
        }
      } else if (ws[idx] < worst_old_v) {
        worst_old_v = ws[idx];
        worst_old = sup[idx];
      }
    }

    if (worst_old < n) {
      // A newcomer can push its displaced neighbour negative rather than go
      // negative itself; near the optimum that is a reposition, not a prune.
      if (!fresh.empty() && best_kkt < 1e-3 && try_slide(fresh.front()))
        continue;
      // Settled atoms losing their weight: prune them, keep the newcomers
      // for one more solve.
      std::vector<std::size_t> next;
      next.reserve(sup.size());
      for (std::size_t idx = 0; idx < sup.size(); ++idx)
        if (ws[idx] >= -1e-12 || is_fresh(sup[idx])) next.push_back(sup[idx]);
      // Pruning a saddle solution can cascade and eat the whole support.
      // Once a good support is known, catch the collapse early, put the good
      // one back, and stop re-adding the atom that set the cascade off.
      if (best_kkt < 1e-3 && !best_sup.empty() &&
          next.size() * 4 < best_sup.size() * 3) {
        if (++restores > 16 || tabu.size() > 512) return false;
        for (std::size_t t : fresh) tabu.emplace_back(t, cur_round + 100);
        sup = best_sup;
        fresh.clear();
        continue;
      }
      sup.swap(next);
      continue;
    }

    if (worst_new < n) {
      // A newcomer whose solved weight is negative landed on the flat top of
      // a settled atom that is itself slightly misplaced; reposition it.
      const std::size_t j = worst_new;
      if (try_slide(j)) continue;
      std::vector<std::size_t> next;
      next.reserve(sup.size());
      for (std::size_t i : sup)
        if (i != j) next.push_back(i);
      sup.swap(next);
      erase_from(fresh, j);
      // In the endgame a dropped dip would be re-picked verbatim next round;
      // shelve it for a while so the remaining dips get their turn.
      if (best_kkt < 1e-4 && tabu.size() <= 512)
        tabu.emplace_back(j, cur_round + 24);
      // A dip that keeps bouncing with no other dips left means every move
      // from this support is exhausted; hand control back to the caller.
      if (j == bounce_j) {
        if (++bounces >= 3) return false;
      } else {
        bounce_j = j;
        bounces = 0;
      }
      continue;
    }

    fresh.clear();
    std::fill(w.begin(), w.end(), 0.0);
    std::fill(p.begin(), p.end(), 0.0);
    double sum = 0.0;
    for (std::size_t idx = 0; idx < sup.size(); ++idx) {
      const double wi = std::max(0.0, ws[idx]);
      w[sup[idx]] = wi;
      sum += wi;
    }
    if (!(sum > 0.0)) return false;
    for (std::size_t idx = 0; idx < sup.size(); ++idx) {
      const double c = w[sup[idx]] / sum;
      w[sup[idx]] = c;
      const double* col = k.row(sup[idx]);
      for (std::size_t i = 0; i < n; ++i) p[i] += c * col[i];
    }

    certificate(w, p, opts.weight_floor, cand);
    cur_en = cand.energy;
    if (cand.kkt <= opts.tol) {
      cand.w = std::move(w);
      cand.p = std::move(p);
      cand.converged = true;
      cand.iterations = run.iterations;
      run = std::move(cand);
      return true;
    }
    // A batch of additions can trigger a prune cascade that ejects good
    // atoms.  Keep the best certified support on hand and fall back to it
    // when the walk has clearly been knocked off course.
    if (best_kkt < 1e-4 && cand.kkt > 100.0 * best_kkt) {
      if (++restores > 16) return false;
      sup = best_sup;
      fresh.clear();
      continue;
    }
    // The walk may pass through slightly worse supports on its way down, so
    // a shrinking residual counts as progress even when the energy does not.
    const bool en_gain =
        !have_en ||
        cand.energy < best_en - 1e-15 * std::max(1.0, std::fabs(best_en));
    const bool kkt_gain = cand.kkt < 0.5 * best_kkt;
    if (en_gain) best_en = cand.energy;
    if (cand.kkt < best_kkt) {
      best_kkt = cand.kkt;
      best_sup = sup;
    }
    if (en_gain || kkt_gain) {
      stall = 0;
    } else if (++stall >= 200) {
      return false;
    }
    have_en = true;

    // One new atom per kernel plateau: a second dip inside the flat top of a
    // dip already taken this round would just shadow it.  Near the optimum,
    // grow one atom at a time; large batches are only worth the churn early.
    const std::size_t batch = best_kkt < 1e-4 ? 1 : 8;
    const double dip_floor = cand.energy - 0.25 * opts.tol;
    std::vector<std::pair<double, std::size_t>> dips;
    for (std::size_t i = 0; i < n; ++i)
      if (p[i] < dip_floor && w[i] <= 0.0) dips.emplace_back(p[i], i);
    if (dips.empty()) return false;
    std::sort(dips.begin(), dips.end());
    const auto take_dips = [&]() {
      for (const auto& [pv, i] : dips) {
        if (is_tabu(i)) continue;
        bool shadowed = false;
        for (std::size_t t : fresh)
          if (k.at(i, t) > 0.999) {
            shadowed = true;
            break;
          }
        if (shadowed) continue;
        sup.push_back(i);
        fresh.push_back(i);
        if (fresh.size() >= batch) break;
      }
    };
    take_dips();
    // Everything below the floor is shelved: idling until a shelf expires
    // would burn rounds on identical solves, so release the oldest early.
    while (fresh.empty() && !tabu.empty()) {
      tabu.erase(tabu.begin());
      take_dips();
    }
    if (fresh.empty()) return false;
  }
  return false;
}

// Linearization-based descent over the simplex with away steps and exact
// line search; every iteration touches one matrix column, so the per-step
// cost is linear in the point count.  An active-set polish finishes the
// solve exactly once the support has settled.
inline SolverRun solve_from(const KernelMatrix& k, std::vector<double> w,
                            const SolveOptions& opts) {
  const std::size_t n = k.n;
  SolverRun run;
  run.p.assign(n, 0.0);
  refresh_potential(k, w, run.p);
  std::vector<double>& p = run.p;

  // Warm starts usually arrive with the right support already; finishing
  // them directly skips the whole loop.
  if (try_polish(k, opts, w, run, 256)) {
    run.iterations = 0;
    return run;
  }

  constexpr std::size_t kPolishCap = 1500;
  std::size_t it = 0;
  std::size_t last_cert = 0;
  for (; it < opts.max_iter; ++it) {
    double en = 0.0;
    for (std::size_t i = 0; i < n; ++i) en += w[i] * p[i];

    std::size_t i_min = 0;
    for (std::size_t i = 1; i < n; ++i)
      if (p[i] < p[i_min]) i_min = i;

    std::size_t j_max = n;
    for (std::size_t i = 0; i < n; ++i)
      if (w[i] > 0.0 && (j_max == n || p[i] > p[j_max])) j_max = i;

    const double gap_fw = en - p[i_min];
    const double gap_away = (j_max < n) ? p[j_max] - en : 0.0;

    if (std::max(gap_fw, gap_away) <= 0.5 * opts.tol &&
        (it - last_cert >= 64 || it == 0)) {
      last_cert = it;
      refresh_potential(k, w, p);
      run.w = w;
      certificate(w, p, opts.weight_floor, run);
      if (run.kkt <= opts.tol) {
        run.converged = true;
        break;
      }
      if (try_polish(k, opts, w, run, kPolishCap)) break;
    }

    const bool fw_step = gap_fw >= gap_away;
    double gamma, gamma_max;
    std::size_t col;
    if (fw_step) {
      col = i_min;
      gamma_max = 1.0;
      const double curv = k.at(col, col) - 2.0 * p[col] + en;
      gamma = curv > 0.0 ? std::min(gamma_max, gap_fw / curv) : gamma_max;
    } else {
      col = j_max;
      if (w[col] >= 1.0) {
        // Single-atom measure: nothing to move away from.
        refresh_potential(k, w, p);
        run.w = w;
        certificate(w, p, opts.weight_floor, run);
        run.converged = run.kkt <= opts.tol;
        break;
      }
      gamma_max = w[col] / (1.0 - w[col]);
      const double curv = en - 2.0 * p[col] + k.at(col, col);
      gamma = curv > 0.0 ? std::min(gamma_max, gap_away / curv) : gamma_max;
    }
    if (!(gamma > 0.0)) gamma = 0.0;

    const double* column = k.row(col);  // symmetric, row doubles as column
    if (fw_step) {
      const double keep = 1.0 - gamma;
      for (std::size_t i = 0; i < n; ++i) {
        w[i] *= keep;
        p[i] = keep * p[i] + gamma * column[i];
      }
      w[col] += gamma;
    } else {
      const double grow = 1.0 + gamma;
      const bool drop = gamma >= gamma_max * (1.0 - 1e-12);
      for (std::size_t i = 0; i < n; ++i) {
        w[i] *= grow;
        p[i] = grow * p[i] - gamma * column[i];
      }
      w[col] = drop ? 0.0 : std::max(0.0, w[col] - gamma);
    }

    if ((it & 0x3ff) == 0x3ff) {
      double sum = 0.0;
      for (double v : w) sum += v;
      if (sum > 0.0 && std::fabs(sum - 1.0) > 1e-14) {
        const double inv = 1.0 / sum;
        for (double& v : w) v *= inv;
      }
      refresh_potential(k, w, p);
      if ((it & 0x1fff) == 0x1fff && try_polish(k, opts, w, run, kPolishCap))
        break;
    }
  }

  if (!run.converged) {
    refresh_potential(k, w, p);
    run.w = w;
    certificate(w, p, opts.weight_floor, run);
    run.converged = run.kkt <= opts.tol;
    if (!run.converged && try_polish(k, opts, w, run, kPolishCap))
      run.converged = true;
  }
  run.iterations = std::min(it + 1, opts.max_iter);
  return run;
}

}  // namespace detail

// Minimal-energy probability weights for the given kernel matrix.  `warm`
// optionally seeds one extra start (used when sweeping a scale grid).
inline CapacityResult solve_equilibrium(const KernelMatrix& k,
                                        const SolveOptions& opts = {},
                                        const std::vector<double>* warm =
                                            nullptr) {
  const std::size_t n = k.n;
  if (n == 0) throw invalid_parameter("solve: empty matrix");
  if (!(opts.tol > 0.0)) throw invalid_parameter("solve: tol must be > 0");

  std::vector<std::vector<double>> starts;
  if (warm != nullptr && warm->size() == n) starts.push_back(*warm);
  starts.emplace_back(n, 1.0 / static_cast<double>(n));
  Rng rng = Rng(opts.seed).child("solver-starts");
  for (int rst = 1; rst < opts.restarts; ++rst) {
    Rng stream = rng.child(static_cast<std::uint64_t>(rst));
    std::vector<double> w(n);
    double sum = 0.0;
    for (double& v : w) {
      v = -std::log(stream.uniform_open());
      sum += v;
    }
    for (double& v : w) v /= sum;
    starts.push_back(std::move(w));
  }

  detail::SolverRun best;
  bool have = false;
  std::size_t total_iter = 0;
  for (auto& start : starts) {
    detail::SolverRun run = detail::solve_from(k, std::move(start), opts);
    total_iter += run.iterations;
    // Converged runs are ranked by energy; so are unconverged ones, since
    // the reported value should be the best primal found and the residual is
    // carried alongside either way.
    const bool better =
        !have ||
        (run.converged && !best.converged) ||
        (run.converged == best.converged && run.energy < best.energy);
    if (better) {
      best = std::move(run);
      have = true;
    }
  }

  CapacityResult out;
  out.min_energy = best.energy;
  out.capacity = best.energy > 0.0 ? 1.0 / best.energy : 0.0;
  out.equilibrium.weights = std::move(best.w);
  out.potential_min_on_support = best.pot_min_support;
  out.potential_max_off_support_defect = best.defect_below;
  out.kkt_residual = best.kkt;
  out.iterations = total_iter;
  out.converged = best.converged;
  out.support_size = best.support;
  return out;
}

// Exact-duplicate merge before assembly; equilibrium weights live on the
// distinct points.  Duplicates would make the minimizer non-unique without
// changing the minimal energy.
struct DedupResult {
  PointSet points;
  std::size_t removed = 0;
};

inline DedupResult merge_duplicates(const PointSet& e) {
  struct VecHash {
    std::size_t operator()(const std::vector<double>& v) const {
      std::uint64_t h = 0xcbf29ce484222325ull;
      for (double x : v) {
        std::uint64_t b;
        static_assert(sizeof(b) == sizeof(x));
        std::memcpy(&b, &x, sizeof(b));
        h = (h ^ b) * 0x100000001b3ull;
      }
      return static_cast<std::size_t>(h);
    }
  };
  DedupResult out;
  out.points.dim = e.dim;
  std::unordered_map<std::vector<double>, bool, VecHash> seen;
  std::vector<double> key(e.dim);
  for (std::size_t i = 0; i < e.count(); ++i) {
    key.assign(e.point(i), e.point(i) + e.dim);
    if (seen.emplace(key, true).second)
      out.points.coords.insert(out.points.coords.end(), e.point(i),
                               e.point(i) + e.dim);
    else
      ++out.removed;
  }
  return out;
}

// Capacity across a scale grid, one solve per r, reusing the distance matrix
// and warm-starting each solve from the previous equilibrium.
inline std::vector<CapacityResult> capacity_curve(
    const PointSet& e, double s, const std::vector<double>& r_grid,
    const SolveOptions& opts = {},
    KernelSpec::Family family = KernelSpec::Family::phi) {
  if (r_grid.empty()) throw invalid_parameter("capacity curve: empty r grid");
  DedupResult dedup = merge_duplicates(e);
  if (dedup.removed > 0)
    std::fprintf(stderr,
                 "warning: merged %zu duplicate points before solving\n",
                 dedup.removed);
  const DistanceMatrix dm = assemble_distances(dedup.points);

  std::vector<CapacityResult> out;
  out.reserve(r_grid.size());
  const std::vector<double>* warm = nullptr;
  for (double r : r_grid) {
    KernelSpec spec{family, s, r};
    const KernelMatrix k = assemble_matrix(dm, spec, dedup.points.dim);
    CapacityResult res = solve_equilibrium(k, opts, warm);
    res.r = r;
    res.s = s;
    out.push_back(std::move(res));
    warm = &out.back().equilibrium.weights;
  }
  return out;
}

}  // namespace capdim
