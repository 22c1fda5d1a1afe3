/*
 * Copyright 2026 The coordcap Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <deque>
#include <mutex>
#include <optional>
#include <vector>

#include "coordcap/info.hpp"
#include "coordcap/lp.hpp"
#include "coordcap/types.hpp"
#include "coordcap/util.hpp"

namespace coordcap {

struct SolverOptions {
  double tol = 1e-6;                   // certified gap target, nats
  std::int64_t max_iterations = 100000;
};

/// Per-state interference targets, met exactly (at the 1e-9 pre-image slack).
struct MultipleProblem {
  CompoundChannel channel;
  std::vector<Distribution> targets;

  MultipleProblem(CompoundChannel ch, std::vector<Distribution> t)
      : channel(std::move(ch)), targets(std::move(t)) {
    if (targets.size() != channel.num_states())
      throw std::invalid_argument("MultipleProblem: one target per state required");
    for (const auto& q : targets)
      if (q.size() != channel.alphabet_z().size())
        throw std::invalid_argument("MultipleProblem: target alphabet mismatch");
  }
};

/// One common target, met within a per-state variational-distance budget.
struct AdaptiveProblem {
  CompoundChannel channel;
  Distribution target;
  std::vector<double> deltas;

  AdaptiveProblem(CompoundChannel ch, Distribution t, std::vector<double> d)
      : channel(std::move(ch)), target(std::move(t)), deltas(std::move(d)) {
    if (target.size() != channel.alphabet_z().size())
      throw std::invalid_argument("AdaptiveProblem: target alphabet mismatch");
    if (deltas.size() != channel.num_states())
      throw std::invalid_argument("AdaptiveProblem: one delta per state required");
    for (double d2 : deltas)
      if (!(d2 >= 0.0)) throw std::invalid_argument("AdaptiveProblem: deltas must be >= 0");
  }
};

struct FeasibilityResult {
  bool feasible = false;
  std::optional<Distribution> witness;
  double min_entry = 0.0;  // witness' smallest input probability; > 0 iff strictly interior
};

struct CapacityResult {
  bool feasible = false;
  std::optional<double> rate_nats;
  std::optional<double> rate_bits;
  std::optional<Distribution> optimizer;
  std::vector<double> per_state_mi;
  std::vector<std::size_t> active_states;  // within 1e-6 nats of the minimum
  std::int64_t iterations = 0;
  double duality_gap_estimate = 0.0;
  bool converged = false;
  bool boundary_smoothing_used = false;
  bool concavity_ok = true;  // midpoint re-verification along the iterate path
};

namespace detail {

/// Geometry + objective data shared by both problem flavors: maximize
/// min_s I(N through kernel_y[s]) over the N meeting, for every state,
/// ||push_forward(N, kernel_z[s]) - Q_s||_1 <= delta_s. Exact pre-image
/// constraints arrive here with delta_s already lifted to the 1e-9 slack.
struct MaxMinInstance {
  std::size_t k = 0;  // input alphabet size
  std::size_t zs = 0;
  std::vector<std::vector<std::vector<double>>> j;  // [s][a][y]
  std::vector<double> c_row;                        // [s*k+a] = sum_y J log J
  std::vector<std::vector<std::vector<double>>> kz;  // [s][a][z]
  std::vector<std::vector<double>> q;                // [s][z]
  std::vector<double> deltas;                        // effective (slack-lifted)

  std::size_t states() const { return j.size(); }
  std::size_t base_vars() const { return k + 2 * states() * zs; }
};

inline MaxMinInstance make_instance(const CompoundChannel& ch,
                                    const std::vector<Distribution>& targets,
                                    const std::vector<double>& deltas) {
  MaxMinInstance inst;
  inst.k = ch.alphabet_x().size();
  inst.zs = ch.alphabet_z().size();
  const std::size_t s_count = ch.num_states();
  inst.j.resize(s_count);
  inst.kz.resize(s_count);
  inst.q.resize(s_count);
  inst.c_row.assign(s_count * inst.k, 0.0);
  inst.deltas.resize(s_count);
  for (std::size_t s = 0; s < s_count; ++s) {
    inst.deltas[s] = std::max(deltas[s], kExactPreimageTol);
    inst.q[s] = targets[s].probs();
    inst.j[s].resize(inst.k);
    inst.kz[s].resize(inst.k);
    for (std::size_t a = 0; a < inst.k; ++a) {
      inst.j[s][a] = ch.state(s).kernel_y.row(a).probs();
      inst.kz[s][a] = ch.state(s).kernel_z.row(a).probs();
      double c = 0.0;
      for (double v : inst.j[s][a])
        if (v > 0.0) c += v * std::log(v);
      inst.c_row[s * inst.k + a] = c;
    }
  }
  return inst;
}

/// I(N through state-s kernel) for an arbitrary nonnegative N (the natural
/// concave extension off the simplex, which the supergradient differentiates).
inline double state_mi(const MaxMinInstance& inst, std::size_t s, const std::vector<double>& n) {
  std::vector<double> m(inst.j[s][0].size(), 0.0);
  double lin = 0.0;
  for (std::size_t a = 0; a < inst.k; ++a) {
    if (n[a] == 0.0) continue;
    lin += n[a] * inst.c_row[s * inst.k + a];
    for (std::size_t b = 0; b < m.size(); ++b) m[b] += n[a] * inst.j[s][a][b];
  }
  double mlogm = 0.0;
  for (double v : m)
    if (v > 0.0) mlogm += v * std::log(v);
  return lin - mlogm;
}

inline double min_state_mi(const MaxMinInstance& inst, const std::vector<double>& n) {
  double f = kInf;
  for (std::size_t s = 0; s < inst.states(); ++s) f = std::min(f, state_mi(inst, s, n));
  return f;
}

/// Exact gradient of state_mi at strictly positive n:
/// g_a = sum_y J(y|a) log(J(y|a)/M(y)) - 1.
inline std::vector<double> state_mi_gradient(const MaxMinInstance& inst, std::size_t s,
                                             const std::vector<double>& n) {
  std::vector<double> m(inst.j[s][0].size(), 0.0);
  for (std::size_t a = 0; a < inst.k; ++a)
    for (std::size_t b = 0; b < m.size(); ++b) m[b] += n[a] * inst.j[s][a][b];
  std::vector<double> g(inst.k, -1.0);
  for (std::size_t a = 0; a < inst.k; ++a) {
    g[a] += inst.c_row[s * inst.k + a];
    for (std::size_t b = 0; b < m.size(); ++b)
      if (inst.j[s][a][b] > 0.0) g[a] -= inst.j[s][a][b] * std::log(m[b]);
  }
  return g;
}

/// Base polytope rows over variables [N | u_1 v_1 | ... | u_S v_S] (+extras).
inline lp::Problem base_polytope(const MaxMinInstance& inst, std::size_t extra_vars) {
  const std::size_t nv = inst.base_vars() + extra_vars;
  lp::Problem prob(nv);
  {
    std::vector<double> row(nv, 0.0);
    for (std::size_t a = 0; a < inst.k; ++a) row[a] = 1.0;
    prob.add_eq(std::move(row), 1.0);
  }
  for (std::size_t s = 0; s < inst.states(); ++s) {
    const std::size_t u0 = inst.k + 2 * s * inst.zs;
    const std::size_t v0 = u0 + inst.zs;
    for (std::size_t zb = 0; zb < inst.zs; ++zb) {
      std::vector<double> row(nv, 0.0);
      for (std::size_t a = 0; a < inst.k; ++a) row[a] = inst.kz[s][a][zb];
      row[u0 + zb] = -1.0;
      row[v0 + zb] = 1.0;
      prob.add_eq(std::move(row), inst.q[s][zb]);
    }
    std::vector<double> budget(nv, 0.0);
    for (std::size_t zb = 0; zb < inst.zs; ++zb) {
      budget[u0 + zb] = 1.0;
      budget[v0 + zb] = 1.0;
    }
    prob.add_le(std::move(budget), inst.deltas[s]);
  }
  return prob;
}

/// Max-min-entry feasibility refinement: maximize t with N(a) >= t. Returns
/// a strictly interior witness whenever one exists (t* > 0).
inline FeasibilityResult feasibility(const MaxMinInstance& inst) {
  lp::Problem prob = base_polytope(inst, 1);
  const std::size_t t_var = inst.base_vars();
  for (std::size_t a = 0; a < inst.k; ++a) {
    std::vector<double> row(t_var + 1, 0.0);
    row[a] = -1.0;
    row[t_var] = 1.0;
    prob.add_le(std::move(row), 0.0);
  }
  std::vector<double> obj(t_var + 1, 0.0);
  obj[t_var] = 1.0;
  const lp::Solution sol = prob.maximize(obj);
  FeasibilityResult res;
  if (sol.status != lp::Status::optimal) return res;
  res.feasible = true;
  std::vector<double> n(sol.x.begin(), sol.x.begin() + inst.k);
  double sum = 0.0;
  for (double& v : n) {
    v = std::max(0.0, v);
    sum += v;
  }
  for (double& v : n) v /= sum;
  res.witness = Distribution(n);
  res.min_entry = res.witness->min_entry();
  return res;
}

/// Direction vertex for the linearized objective g over the polytope.
inline std::optional<std::vector<double>> fw_vertex(const MaxMinInstance& inst,
                                                    const std::vector<double>& g) {
  lp::Problem prob = base_polytope(inst, 0);
  std::vector<double> obj(inst.base_vars(), 0.0);
  for (std::size_t a = 0; a < inst.k; ++a) obj[a] = g[a];
  const lp::Solution sol = prob.maximize(obj);
  if (sol.status != lp::Status::optimal) return std::nullopt;
  std::vector<double> n(sol.x.begin(), sol.x.begin() + inst.k);
  for (double& v : n) v = std::max(0.0, v);
  return n;
}

struct Cut {
  std::vector<double> grad;  // over N
  double offset;             // f_s(anchor) - <grad, anchor>
};

/// Epigraph upper bound from accumulated linearizations: max t subject to
/// t <= offset_i + <grad_i, N> over the polytope. Every returned value is a
/// valid upper bound on the max-min optimum because each cut overestimates
/// its state's concave objective everywhere.
struct KelleyBound {
  double value;
  std::vector<double> argmax;
};

inline std::optional<KelleyBound> kelley_bound(const MaxMinInstance& inst,
                                               const std::deque<Cut>& cuts) {
  if (cuts.empty()) return std::nullopt;
  lp::Problem prob = base_polytope(inst, 1);
  const std::size_t t_var = inst.base_vars();
  for (const Cut& c : cuts) {
    std::vector<double> row(t_var + 1, 0.0);
    for (std::size_t a = 0; a < inst.k; ++a) row[a] = -c.grad[a];
    row[t_var] = 1.0;
    prob.add_le(std::move(row), c.offset);
  }
  std::vector<double> obj(t_var + 1, 0.0);
  obj[t_var] = 1.0;
  const lp::Solution sol = prob.maximize(obj);
  if (sol.status != lp::Status::optimal) return std::nullopt;
  KelleyBound kb;
  kb.value = sol.objective;
  kb.argmax.assign(sol.x.begin(), sol.x.begin() + inst.k);
  for (double& v : kb.argmax) v = std::max(0.0, v);
  return kb;
}

/// Maximizes the concave phi(gamma) = min_s I((1-gamma) a + gamma b) over
/// [0,1] by ternary section; exact up to interval width ~1e-14.
inline std::pair<double, double> concave_line_search(const MaxMinInstance& inst,
                                                     const std::vector<double>& a,
                                                     const std::vector<double>& b) {
  const auto point = [&](double gamma) {
    std::vector<double> p(inst.k);
    for (std::size_t i = 0; i < inst.k; ++i) p[i] = (1.0 - gamma) * a[i] + gamma * b[i];
    return p;
  };
  const auto phi = [&](double gamma) { return min_state_mi(inst, point(gamma)); };
  double lo = 0.0, hi = 1.0;
  for (int it = 0; it < 200 && hi - lo > 1e-14; ++it) {
    const double m1 = lo + (hi - lo) / 3.0;
    const double m2 = hi - (hi - lo) / 3.0;
    if (phi(m1) < phi(m2))
      lo = m1;
    else
      hi = m2;
  }
  double best_gamma = 0.5 * (lo + hi);
  double best_val = phi(best_gamma);
  for (double g : {0.0, 1.0}) {
    const double v = phi(g);
    if (v > best_val) {
      best_val = v;
      best_gamma = g;
    }
  }
  return {best_gamma, best_val};
}

inline CapacityResult solve_maxmin(const MaxMinInstance& inst, const SolverOptions& opts) {
  if (!(opts.tol > 0.0)) throw std::invalid_argument("SolverOptions: tol must be > 0");
  if (opts.max_iterations < 1)
    throw std::invalid_argument("SolverOptions: max_iterations must be >= 1");
  CapacityResult res;
  const FeasibilityResult feas = feasibility(inst);
  if (!feas.feasible) return res;
  res.feasible = true;

  const std::size_t s_count = inst.states();
  std::vector<double> n_cur(feas.witness->probs());
  std::vector<double> n_best = n_cur;
  double f_best = -kInf;
  double u_best = kInf;
  std::deque<Cut> cuts;
  constexpr std::size_t kMaxCuts = 400;
  constexpr double kTieTol = 1e-9;
  constexpr double kSmooth = 1e-12;

  const auto smooth_if_boundary = [&](const std::vector<double>& n, bool* did) {
    double mn = kInf;
    for (double v : n) mn = std::min(mn, v);
    if (mn > 0.0) {
      *did = false;
      return n;
    }
    *did = true;
    std::vector<double> out(n);
    double sum = 0.0;
    for (double& v : out) {
      v += kSmooth;
      sum += v;
    }
    for (double& v : out) v /= sum;
    return out;
  };

  std::vector<double> prev_iterate;
  double prev_f = 0.0;
  for (std::int64_t iter = 0; iter < opts.max_iterations; ++iter) {
    res.iterations = iter + 1;

    bool smoothed = false;
    const std::vector<double> n_eval = smooth_if_boundary(n_cur, &smoothed);
    res.boundary_smoothing_used = res.boundary_smoothing_used || smoothed;

    std::vector<double> values(s_count);
    std::vector<std::vector<double>> grads(s_count);
    double f_cur = kInf;
    for (std::size_t s = 0; s < s_count; ++s) {
      values[s] = state_mi(inst, s, n_eval);
      grads[s] = state_mi_gradient(inst, s, n_eval);
      f_cur = std::min(f_cur, values[s]);
      cuts.push_back(Cut{grads[s], values[s]});
      double dot = 0.0;
      for (std::size_t a = 0; a < inst.k; ++a) dot += grads[s][a] * n_eval[a];
      cuts.back().offset = values[s] - dot;
    }
    while (cuts.size() > kMaxCuts) cuts.pop_front();

    if (f_cur > f_best) {
      f_best = f_cur;
      n_best = n_eval;
    }

    // Concavity re-verification along the iterate path (midpoint probe).
    if (!prev_iterate.empty()) {
      std::vector<double> mid(inst.k);
      for (std::size_t a = 0; a < inst.k; ++a) mid[a] = 0.5 * (prev_iterate[a] + n_eval[a]);
      if (min_state_mi(inst, mid) < 0.5 * (prev_f + f_cur) - opts.tol) res.concavity_ok = false;
    }
    prev_iterate = n_eval;
    prev_f = f_cur;

    const auto kb = kelley_bound(inst, cuts);
    if (kb) u_best = std::min(u_best, kb->value);
    if (u_best - f_best <= opts.tol) {
      res.converged = true;
      break;
    }

    // Steepest supergradient among the states tied at the minimum
    // (largest Euclidean norm; ties resolved toward the lowest state index).
    std::size_t sel = 0;
    double sel_norm = -1.0;
    for (std::size_t s = 0; s < s_count; ++s) {
      if (values[s] > f_cur + kTieTol) continue;
      double norm = 0.0;
      for (double v : grads[s]) norm += v * v;
      if (norm > sel_norm + 1e-15) {
        sel = s;
        sel_norm = norm;
      }
    }

    const auto vertex = fw_vertex(inst, grads[sel]);
    if (vertex) {
      double gap = 0.0;
      for (std::size_t a = 0; a < inst.k; ++a) gap += grads[sel][a] * ((*vertex)[a] - n_eval[a]);
      // Valid bound: optimum <= max of state sel <= f_s(N) + linearized gap.
      u_best = std::min(u_best, values[sel] + std::max(0.0, gap));
      if (u_best - f_best <= opts.tol) {
        res.converged = true;
        break;
      }
      const auto [gamma, val] = concave_line_search(inst, n_eval, *vertex);
      std::vector<double> n_next(inst.k);
      for (std::size_t a = 0; a < inst.k; ++a)
        n_next[a] = (1.0 - gamma) * n_eval[a] + gamma * (*vertex)[a];
      double next_val = val;
      if (kb) {
        const double kelley_val = min_state_mi(inst, kb->argmax);
        if (kelley_val > next_val) {
          next_val = kelley_val;
          n_next = kb->argmax;
        }
      }
      n_cur = n_next;
    } else if (kb) {
      n_cur = kb->argmax;
    }
  }

  res.duality_gap_estimate = std::max(0.0, u_best - f_best);

  // Final report is recomputed through the public measure functions on the
  // validated optimizer.
  double sum = 0.0;
  for (double& v : n_best) {
    v = std::max(0.0, v);
    sum += v;
  }
  for (double& v : n_best) v /= sum;
  res.optimizer = Distribution(n_best);
  res.per_state_mi.resize(s_count);
  double rate = kInf;
  for (std::size_t s = 0; s < s_count; ++s) {
    res.per_state_mi[s] = state_mi(inst, s, n_best);
    rate = std::min(rate, res.per_state_mi[s]);
  }
  res.rate_nats = rate;
  res.rate_bits = nats_to_bits(rate);
  for (std::size_t s = 0; s < s_count; ++s)
    if (res.per_state_mi[s] <= rate + 1e-6) res.active_states.push_back(s);
  return res;
}

}  // namespace detail

inline FeasibilityResult feasibility_multiple(const MultipleProblem& p) {
  return detail::feasibility(detail::make_instance(
      p.channel, p.targets, std::vector<double>(p.channel.num_states(), 0.0)));
}

inline FeasibilityResult feasibility_adaptive(const AdaptiveProblem& p) {
  return detail::feasibility(detail::make_instance(
      p.channel, std::vector<Distribution>(p.channel.num_states(), p.target), p.deltas));
}

inline CapacityResult capacity_multiple(const MultipleProblem& p, const SolverOptions& opts = {}) {
  return detail::solve_maxmin(
      detail::make_instance(p.channel, p.targets,
                            std::vector<double>(p.channel.num_states(), 0.0)),
      opts);
}

inline CapacityResult capacity_adaptive(const AdaptiveProblem& p, const SolverOptions& opts = {}) {
  return detail::solve_maxmin(
      detail::make_instance(p.channel, std::vector<Distribution>(p.channel.num_states(), p.target),
                            p.deltas),
      opts);
}

struct SweepCell {
  std::vector<double> deltas;
  CapacityResult result;
};

/// Capacity along a grid of per-state delta vectors; cells are independent
/// and run concurrently, with results ordered by grid position.
inline std::vector<SweepCell> region_sweep(const CompoundChannel& channel,
                                           const Distribution& target,
                                           const std::vector<std::vector<double>>& delta_grid,
                                           const SolverOptions& opts = {}, int threads = 0) {
  for (const auto& d : delta_grid)
    if (d.size() != channel.num_states())
      throw std::invalid_argument("region_sweep: delta vector size must match state count");
  std::vector<SweepCell> cells(delta_grid.size());
  parallel_for(delta_grid.size(), resolve_thread_count(threads),
               [&](std::size_t lo, std::size_t hi) {
                 for (std::size_t i = lo; i < hi; ++i) {
                   cells[i].deltas = delta_grid[i];
                   cells[i].result =
                       capacity_adaptive(AdaptiveProblem(channel, target, delta_grid[i]), opts);
                 }
               });
  return cells;
}

namespace detail {

/// Exhaustive lattice oracle: max over all denominator-n types meeting the
/// constraints at tolerance 1/n on variational distance.
inline std::optional<double> brute_force(const MaxMinInstance& inst,
                                         const std::vector<double>& raw_deltas,
                                         std::int64_t lattice_n, int threads) {
  if (lattice_n < 1) throw std::invalid_argument("brute_force_capacity: lattice_n must be >= 1");
  if (composition_count(lattice_n, static_cast<std::int64_t>(inst.k)) > 1e7)
    throw ResourceLimitError("brute_force_capacity: lattice exceeds the 1e7 enumeration guard");
  const double slack = 1.0 / static_cast<double>(lattice_n) + 1e-12;
  const std::size_t k = inst.k;
  const unsigned tc = resolve_thread_count(threads);

  std::vector<double> chunk_best(lattice_n + 1, -kInf);
  parallel_for(static_cast<std::size_t>(lattice_n) + 1, tc, [&](std::size_t lo, std::size_t hi) {
    std::vector<double> n(k);
    const double nn = static_cast<double>(lattice_n);
    for (std::size_t c0 = lo; c0 < hi; ++c0) {
      double local = -kInf;
      const auto consider = [&](const std::vector<std::int64_t>& rest) {
        n[0] = static_cast<double>(c0) / nn;
        for (std::size_t a = 1; a < k; ++a) n[a] = static_cast<double>(rest[a - 1]) / nn;
        for (std::size_t s = 0; s < inst.states(); ++s) {
          double v = 0.0;
          for (std::size_t zb = 0; zb < inst.zs; ++zb) {
            double push = 0.0;
            for (std::size_t a = 0; a < k; ++a) push += n[a] * inst.kz[s][a][zb];
            v += std::abs(push - inst.q[s][zb]);
          }
          if (v > raw_deltas[s] + slack) return;
        }
        local = std::max(local, min_state_mi(inst, n));
      };
      if (k == 1) {
        if (static_cast<std::int64_t>(c0) == lattice_n) consider(std::vector<std::int64_t>{});
      } else {
        for_each_composition(lattice_n - static_cast<std::int64_t>(c0), k - 1, consider);
      }
      chunk_best[c0] = local;
    }
  });
  double best = -kInf;
  for (double v : chunk_best) best = std::max(best, v);
  if (best == -kInf) return std::nullopt;
  return std::max(0.0, best);
}

}  // namespace detail

inline std::optional<double> brute_force_capacity(const MultipleProblem& p, std::int64_t lattice_n,
                                                  int threads = 1) {
  const std::vector<double> zero(p.channel.num_states(), 0.0);
  return detail::brute_force(detail::make_instance(p.channel, p.targets, zero), zero, lattice_n,
                             threads);
}

inline std::optional<double> brute_force_capacity(const AdaptiveProblem& p, std::int64_t lattice_n,
                                                  int threads = 1) {
  return detail::brute_force(
      detail::make_instance(p.channel, std::vector<Distribution>(p.channel.num_states(), p.target),
                            p.deltas),
      p.deltas, lattice_n, threads);
}

}  // namespace coordcap
