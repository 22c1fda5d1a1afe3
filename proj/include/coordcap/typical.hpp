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

#include <cmath>
#include <cstdint>
#include <limits>

#include "coordcap/info.hpp"
#include "coordcap/types.hpp"
#include "coordcap/util.hpp"

namespace coordcap {

struct TypicalityParams {
  double epsilon;
  std::int64_t n;

  TypicalityParams(double eps, std::int64_t blocklength) : epsilon(eps), n(blocklength) {
    if (!(epsilon > 0.0)) throw std::invalid_argument("TypicalityParams: epsilon must be > 0");
    if (n < 1) throw std::invalid_argument("TypicalityParams: n must be >= 1");
  }
};

/// Which marginal-typicality precondition the conditioning sequence meets:
/// base is the epsilon neighborhood (enough for the upper bounds), strict is
/// the epsilon/(2|Y|) neighborhood the lower bounds additionally require.
enum class TypicalityTier { base, strict };

/// Closed-form bracket from one of the typicality theorems. Values are
/// returned raw (possibly above 1, below 0, or overflowed to infinity) with
/// `vacuous` set instead of clamping; log_lower/log_upper carry the finite
/// natural-log forms (log_lower is NaN when the lower value is <= 0).
struct BoundReport {
  double lower = 0.0;
  double upper = 0.0;
  double log_lower = 0.0;
  double log_upper = 0.0;
  double epsilon_m = 0.0;
  double delta_t = 0.0;
  bool vacuous = false;
  TypicalityTier tier = TypicalityTier::base;
};

inline double epsilon_m(const Distribution& p, double epsilon) {
  if (!(epsilon > 0.0)) throw std::invalid_argument("epsilon_m: epsilon must be > 0");
  return -epsilon * std::log(p.min_positive());
}

inline double epsilon_m(const JointDistribution& p, double epsilon) {
  if (!(epsilon > 0.0)) throw std::invalid_argument("epsilon_m: epsilon must be > 0");
  double pmin = kInf;
  for (double v : p.probs())
    if (v > 0.0) pmin = std::min(pmin, v);
  return -epsilon * std::log(pmin);
}

/// log of delta_t(n, epsilon, joint alphabet size); the exponent's "log e"
/// factor equals 1 under the all-nats convention.
inline double log_delta_t(std::int64_t n, double epsilon, std::size_t joint_alphabet_size) {
  if (n < 1) throw std::invalid_argument("delta_t: n must be >= 1");
  if (!(epsilon > 0.0)) throw std::invalid_argument("delta_t: epsilon must be > 0");
  if (joint_alphabet_size < 1) throw std::invalid_argument("delta_t: alphabet size must be >= 1");
  const double m = static_cast<double>(joint_alphabet_size);
  const double nn = static_cast<double>(n);
  return m * std::log(nn + 1.0) - nn * epsilon * epsilon / (2.0 * m * m);
}

/// (n+1)^m * exp(-n eps^2 / (2 m^2)); exceeds 1 for small n (the bound using
/// it is then vacuous, which BoundReport flags).
inline double delta_t(std::int64_t n, double epsilon, std::size_t joint_alphabet_size) {
  return std::exp(log_delta_t(n, epsilon, joint_alphabet_size));
}

/// Marginal strong typicality of one sequence against Q: every empirical
/// frequency within (strictly) epsilon/|X| of Q, and zero empirical count
/// wherever Q is zero. Both clauses literal, no tolerance.
inline bool is_strongly_typical(const Sequence& x, const Distribution& q, double epsilon) {
  if (!(epsilon > 0.0)) throw std::invalid_argument("is_strongly_typical: epsilon must be > 0");
  if (x.empty()) throw std::invalid_argument("is_strongly_typical: empty sequence");
  std::vector<std::int64_t> counts(q.size(), 0);
  for (Symbol s : x) {
    if (s >= q.size())
      throw std::invalid_argument("is_strongly_typical: symbol out of alphabet range");
    ++counts[s];
  }
  const double n = static_cast<double>(x.size());
  const double bound = epsilon / static_cast<double>(q.size());
  for (std::size_t a = 0; a < q.size(); ++a) {
    const double freq = static_cast<double>(counts[a]) / n;
    if (q[a] == 0.0 && counts[a] != 0) return false;
    if (!(std::abs(freq - q[a]) < bound)) return false;
  }
  return true;
}

/// Two-clause joint strong typicality of a pair against P: every joint
/// empirical frequency within (strictly) epsilon/(|X||Y|) of P, and zero
/// empirical count wherever P is zero.
inline bool is_strongly_jointly_typical(const Sequence& x, const Sequence& y,
                                        const JointDistribution& p, double epsilon) {
  if (!(epsilon > 0.0))
    throw std::invalid_argument("is_strongly_jointly_typical: epsilon must be > 0");
  if (x.size() != y.size())
    throw std::invalid_argument("is_strongly_jointly_typical: length mismatch");
  if (x.empty()) throw std::invalid_argument("is_strongly_jointly_typical: empty sequences");
  std::vector<std::int64_t> counts(p.nx() * p.ny(), 0);
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (x[i] >= p.nx() || y[i] >= p.ny())
      throw std::invalid_argument("is_strongly_jointly_typical: symbol out of alphabet range");
    ++counts[x[i] * p.ny() + y[i]];
  }
  const double n = static_cast<double>(x.size());
  const double bound = epsilon / static_cast<double>(p.nx() * p.ny());
  for (std::size_t i = 0; i < counts.size(); ++i) {
    if (p.probs()[i] == 0.0 && counts[i] != 0) return false;
    const double freq = static_cast<double>(counts[i]) / n;
    if (!(std::abs(freq - p.probs()[i]) < bound)) return false;
  }
  return true;
}

/// y conditionally typical given x: the pair is jointly typical.
inline bool is_conditionally_typical(const Sequence& y, const Sequence& x,
                                     const JointDistribution& p, double epsilon) {
  return is_strongly_jointly_typical(x, y, p, epsilon);
}

namespace detail {

/// Tier of x against the first marginal of P; precondition error below base.
inline TypicalityTier require_marginal_tier(const Sequence& x, const JointDistribution& p,
                                            const TypicalityParams& params, const char* op) {
  if (static_cast<std::int64_t>(x.size()) != params.n)
    throw std::invalid_argument(std::string(op) + ": params.n does not match sequence length");
  const Distribution q = p.marginal_x();
  if (!is_strongly_typical(x, q, params.epsilon))
    throw std::domain_error(std::string(op) +
                            ": x is not marginally typical at the required epsilon");
  const double strict_eps = params.epsilon / (2.0 * static_cast<double>(p.ny()));
  return is_strongly_typical(x, q, strict_eps) ? TypicalityTier::strict : TypicalityTier::base;
}

inline void fill_linear_from_logs(BoundReport& r) {
  r.upper = std::exp(r.log_upper);
  r.lower = std::isnan(r.log_lower) ? r.lower : std::exp(r.log_lower);
}

}  // namespace detail

/// (1 - delta_t(n,eps)) e^{n(H(P)-eps_m)} <= |typical set| <= e^{n(H(P)+eps_m)}.
inline BoundReport jointly_typical_set_size_bounds(const JointDistribution& p,
                                                   const TypicalityParams& params) {
  BoundReport r;
  const double h = entropy(p);
  const double nn = static_cast<double>(params.n);
  r.epsilon_m = epsilon_m(p, params.epsilon);
  r.delta_t = delta_t(params.n, params.epsilon, p.nx() * p.ny());
  r.log_upper = nn * (h + r.epsilon_m);
  const double lead = nn * (h - r.epsilon_m);
  if (r.delta_t < 1.0) {
    r.log_lower = lead + std::log1p(-r.delta_t);
    detail::fill_linear_from_logs(r);
  } else {
    r.upper = std::exp(r.log_upper);
    r.lower = (1.0 - r.delta_t) * std::exp(lead);
    r.log_lower = std::numeric_limits<double>::quiet_NaN();
    r.vacuous = true;
  }
  return r;
}

/// e^{-n(H_Q(J)+eps_m)} <= Pr(y | x) <= e^{-n(H_Q(J)-eps_m)} for every y in
/// the conditional typical set, with x at least base-tier typical.
inline BoundReport conditional_sequence_probability_bounds(const JointDistribution& p,
                                                           const Sequence& x,
                                                           const TypicalityParams& params) {
  BoundReport r;
  r.tier = detail::require_marginal_tier(x, p, params, "conditional_sequence_probability_bounds");
  const double hq = entropy(p) - entropy(p.marginal_x());
  const double nn = static_cast<double>(params.n);
  r.epsilon_m = epsilon_m(p, params.epsilon);
  r.delta_t = delta_t(params.n, params.epsilon, p.nx() * p.ny());
  r.log_lower = -nn * (hq + r.epsilon_m);
  r.log_upper = -nn * (hq - r.epsilon_m);
  detail::fill_linear_from_logs(r);
  if (r.upper > 1.0) r.vacuous = true;
  return r;
}

/// Total conditional-set probability: trivially <= 1; > 1 - delta_t(n, eps/2)
/// when x meets the strict tier (the lower bound is 0 otherwise).
inline BoundReport conditional_set_probability_bounds(const JointDistribution& p,
                                                      const Sequence& x,
                                                      const TypicalityParams& params) {
  BoundReport r;
  r.tier = detail::require_marginal_tier(x, p, params, "conditional_set_probability_bounds");
  r.epsilon_m = epsilon_m(p, params.epsilon);
  r.delta_t = delta_t(params.n, params.epsilon / 2.0, p.nx() * p.ny());
  r.upper = 1.0;
  r.log_upper = 0.0;
  r.log_lower = std::numeric_limits<double>::quiet_NaN();
  if (r.tier == TypicalityTier::strict) {
    r.lower = 1.0 - r.delta_t;
    if (r.lower > 0.0) r.log_lower = std::log1p(-r.delta_t);
    if (r.lower < 0.0) r.vacuous = true;
  } else {
    r.lower = 0.0;
  }
  return r;
}

/// Probability of the conditional typical set when y is drawn i.i.d. from an
/// unrelated q_Y: < e^{-n(I(P)+D(S||q_Y)-eps_m(P)-eps_m(q_Y))}, and with x at
/// the strict tier also > (1-delta_t(n,eps/2)) e^{-n(I(P)+D(S||q_Y)+eps_m(P)+eps_m(q_Y))}.
inline BoundReport cross_probability_bound(const JointDistribution& p, const Distribution& q_y,
                                           const Sequence& x, const TypicalityParams& params) {
  if (q_y.size() != p.ny())
    throw std::invalid_argument("cross_probability_bound: q_Y alphabet size mismatch");
  BoundReport r;
  r.tier = detail::require_marginal_tier(x, p, params, "cross_probability_bound");
  const double nn = static_cast<double>(params.n);
  const double exponent = mutual_information(p) + kl_divergence(p.marginal_y(), q_y);
  const double em_p = epsilon_m(p, params.epsilon);
  const double em_q = epsilon_m(q_y, params.epsilon);
  r.epsilon_m = em_p;
  r.delta_t = delta_t(params.n, params.epsilon / 2.0, p.nx() * p.ny());
  r.log_upper = -nn * (exponent - em_p - em_q);
  r.log_lower = std::numeric_limits<double>::quiet_NaN();
  r.upper = std::exp(r.log_upper);
  if (r.tier == TypicalityTier::strict) {
    const double lead = -nn * (exponent + em_p + em_q);
    if (r.delta_t < 1.0) {
      r.log_lower = lead + std::log1p(-r.delta_t);
      r.lower = std::exp(r.log_lower);
    } else {
      r.lower = (1.0 - r.delta_t) * std::exp(lead);
      r.vacuous = true;
    }
  } else {
    r.lower = 0.0;
  }
  if (r.upper > 1.0) r.vacuous = true;
  return r;
}

}  // namespace coordcap
