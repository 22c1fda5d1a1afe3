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
#include <bit>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <map>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "coordcap/rng.hpp"
#include "coordcap/typical.hpp"
#include "coordcap/types.hpp"
#include "coordcap/util.hpp"

namespace coordcap {

/// How codewords are realized. Fresh draws an independent codebook per trial;
/// shared reuses one codebook across all trials. When a fresh-codebook run
/// needs more codeword symbols than the memory guard allows, the simulator
/// switches to the ensemble path: only the transmitted codeword is drawn, the
/// first decoder error event is checked directly, and the second (confusion
/// by another codeword) is resolved by one Bernoulli draw with its exact
/// probability over the codebook ensemble, computed by method-of-types column
/// sums. Codewords are i.i.d. and independent of the received sequence, so
/// this is distribution-identical to materializing the codebook. No such
/// shortcut exists for shared codebooks (trials would be dependent), which
/// over the guard are a resource error.
enum class CodebookMode { fresh_explicit, fresh_ensemble, shared_explicit };

struct SimConfig {
  CompoundChannel channel;
  Distribution input_pmf;
  double rate_nats;
  std::int64_t blocklength;
  std::int64_t trials;
  std::uint64_t seed;
  double epsilon = 0.2;
  std::optional<Distribution> target;                      // common Q (adaptive check)
  std::optional<std::vector<double>> deltas;               // per-state budget annotation
  std::optional<std::vector<Distribution>> state_targets;  // per-state Q_s (multiple check)
  bool fresh_codebook = true;
  double rate_slack = 0.02;  // folded off the rate when sizing the codebook
  std::int64_t max_codebook_symbols = 10'000'000;
  int threads = 0;

  SimConfig(CompoundChannel ch, Distribution n, double rate, std::int64_t n_block,
            std::int64_t trial_count, std::uint64_t rng_seed)
      : channel(std::move(ch)),
        input_pmf(std::move(n)),
        rate_nats(rate),
        blocklength(n_block),
        trials(trial_count),
        seed(rng_seed) {
    if (input_pmf.size() != channel.alphabet_x().size())
      throw std::invalid_argument("SimConfig: input_pmf alphabet mismatch");
    if (!(rate_nats >= 0.0) || !std::isfinite(rate_nats))
      throw std::invalid_argument("SimConfig: rate must be finite and >= 0");
    if (blocklength < 1) throw std::invalid_argument("SimConfig: blocklength must be >= 1");
    if (trials < 1) throw std::invalid_argument("SimConfig: trials must be >= 1");
  }

  void validate() const {
    if (!(epsilon > 0.0)) throw std::invalid_argument("SimConfig: epsilon must be > 0");
    if (!(rate_slack >= 0.0)) throw std::invalid_argument("SimConfig: rate_slack must be >= 0");
    if (max_codebook_symbols < 1)
      throw std::invalid_argument("SimConfig: max_codebook_symbols must be >= 1");
    if (target.has_value() == state_targets.has_value())
      throw std::invalid_argument(
          "SimConfig: exactly one of target / state_targets must be given");
    if (target && target->size() != channel.alphabet_z().size())
      throw std::invalid_argument("SimConfig: target alphabet mismatch");
    if (deltas) {
      if (!target) throw std::invalid_argument("SimConfig: deltas require a common target");
      if (deltas->size() != channel.num_states())
        throw std::invalid_argument("SimConfig: one delta per state required");
    }
    if (state_targets) {
      if (state_targets->size() != channel.num_states())
        throw std::invalid_argument("SimConfig: one state target per state required");
      for (const auto& q : *state_targets)
        if (q.size() != channel.alphabet_z().size())
          throw std::invalid_argument("SimConfig: state target alphabet mismatch");
    }
  }

  /// log of the codebook size e-exponent: n * (rate - rate_slack).
  double log_message_count() const {
    return static_cast<double>(blocklength) * (rate_nats - rate_slack);
  }
};

struct Codebook {
  std::int64_t message_count;
  std::int64_t blocklength;
  std::vector<Sequence> words;
};

/// Draws message_count i.i.d. codewords of input_pmf^blocklength; the guard
/// caps total symbols.
inline Codebook generate_codebook(const Distribution& input_pmf, std::int64_t blocklength,
                                  std::int64_t message_count, CounterRng& rng,
                                  std::int64_t max_symbols = 10'000'000) {
  if (blocklength < 1) throw std::invalid_argument("generate_codebook: blocklength must be >= 1");
  if (message_count < 1)
    throw std::invalid_argument("generate_codebook: message_count must be >= 1");
  if (message_count > max_symbols / blocklength)
    throw ResourceLimitError("generate_codebook: codebook exceeds the symbol memory guard");
  Codebook cb{message_count, blocklength, {}};
  cb.words.resize(static_cast<std::size_t>(message_count));
  std::span<const double> p(input_pmf.probs());
  for (auto& w : cb.words) {
    w.resize(static_cast<std::size_t>(blocklength));
    for (auto& sym : w) sym = rng.sample(p);
  }
  return cb;
}

/// Sends x through the state's two kernels symbol by symbol; returns (y, z).
/// Only the marginal kernels are modeled, so Y and Z are conditionally
/// independent given each input symbol (every reported statistic depends on
/// one output stream at a time).
inline std::pair<Sequence, Sequence> transmit(const Sequence& x, std::size_t state_index,
                                              const CompoundChannel& channel, CounterRng& rng) {
  if (state_index >= channel.num_states())
    throw std::invalid_argument("transmit: state index out of range");
  const ChannelState& st = channel.state(state_index);
  Sequence y(x.size()), z(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (x[i] >= channel.alphabet_x().size())
      throw std::invalid_argument("transmit: symbol out of alphabet range");
    y[i] = rng.sample(st.kernel_y.row(x[i]).probs());
    z[i] = rng.sample(st.kernel_z.row(x[i]).probs());
  }
  return {std::move(y), std::move(z)};
}

struct DecodeOutcome {
  enum class Kind { decoded, none_typical, ambiguous } kind = Kind::none_typical;
  std::int64_t message = -1;  // valid only when kind == decoded
};

namespace detail {

/// Joint typicality of raw pair counts against one target joint; the exact
/// two-clause predicate on count lattices.
inline bool counts_typical(const std::vector<std::int64_t>& counts, const std::vector<double>& p,
                           std::int64_t n, double bound) {
  const double nn = static_cast<double>(n);
  for (std::size_t i = 0; i < counts.size(); ++i) {
    if (p[i] == 0.0 && counts[i] != 0) return false;
    if (!(std::abs(static_cast<double>(counts[i]) / nn - p[i]) < bound)) return false;
  }
  return true;
}

inline bool counts_typical_any(const std::vector<std::int64_t>& counts,
                               const std::vector<std::vector<double>>& joints, std::int64_t n,
                               double bound) {
  for (const auto& p : joints)
    if (counts_typical(counts, p, n, bound)) return true;
  return false;
}

}  // namespace detail

/// Joint-typicality decoder over all candidate states: m is a candidate iff
/// its codeword is jointly typical with y under at least one state's joint
/// (input_pmf chained with that state's communication kernel). Exactly one
/// candidate message decodes; none / more than one are the two error kinds.
inline DecodeOutcome decode(const Sequence& y, const Codebook& codebook,
                            const Distribution& input_pmf,
                            const std::vector<Kernel>& state_kernels_y, double epsilon) {
  if (static_cast<std::int64_t>(y.size()) != codebook.blocklength)
    throw std::invalid_argument("decode: received length does not match the codebook");
  if (state_kernels_y.empty()) throw std::invalid_argument("decode: no states");
  const std::size_t nx = input_pmf.size();
  const std::size_t ny = state_kernels_y.front().output_size();
  std::vector<std::vector<double>> joints;
  joints.reserve(state_kernels_y.size());
  for (const auto& k : state_kernels_y)
    joints.push_back(JointDistribution::chain(input_pmf, k).probs());
  const double bound = epsilon / static_cast<double>(nx * ny);

  DecodeOutcome out;
  std::vector<std::int64_t> counts(nx * ny);
  std::int64_t found = -1;
  for (std::size_t m = 0; m < codebook.words.size(); ++m) {
    const Sequence& x = codebook.words[m];
    std::fill(counts.begin(), counts.end(), 0);
    for (std::size_t i = 0; i < y.size(); ++i) ++counts[x[i] * ny + y[i]];
    if (!detail::counts_typical_any(counts, joints, codebook.blocklength, bound)) continue;
    if (found >= 0) {
      out.kind = DecodeOutcome::Kind::ambiguous;
      return out;
    }
    found = static_cast<std::int64_t>(m);
  }
  if (found < 0) {
    out.kind = DecodeOutcome::Kind::none_typical;
  } else {
    out.kind = DecodeOutcome::Kind::decoded;
    out.message = found;
  }
  return out;
}

struct StateSimStats {
  std::size_t state = 0;
  std::int64_t trials = 0;
  std::int64_t errors = 0;
  double error_rate = 0.0;
  double wilson_low = 0.0;
  double wilson_high = 0.0;
  std::int64_t err_input_atypical = 0;  // sent codeword atypical with y under every state
  std::int64_t err_confusion = 0;       // some other codeword typical
  double mean_v = 0.0;
  double v_std_error = 0.0;
  std::vector<std::int64_t> v_histogram;  // kHistBins bins over [0, 2]
  double delta_checked = std::numeric_limits<double>::quiet_NaN();
};

struct SimReport {
  static constexpr int kHistBins = 40;
  static constexpr double kHistMax = 2.0;

  CodebookMode mode = CodebookMode::fresh_explicit;
  std::int64_t blocklength = 0;
  std::int64_t trials_per_state = 0;
  std::uint64_t seed = 0;
  double rate_nats = 0.0;
  double rate_slack = 0.0;
  double epsilon = 0.0;
  double message_count = 0.0;      // ceil(e^{n(R-slack)}), +inf past double range
  double log_message_count = 0.0;  // n(R-slack), always finite
  std::vector<StateSimStats> per_state;
  double max_state_error = 0.0;
};

namespace detail {

// Substream role tags; every random decision owns a (state, trial, role)
// substream so trials are reproducible independently of thread scheduling.
inline constexpr std::uint64_t kRoleCodebook = 1;
inline constexpr std::uint64_t kRoleMessage = 2;
inline constexpr std::uint64_t kRoleChannel = 3;
inline constexpr std::uint64_t kRoleConfusion = 4;
inline constexpr std::uint64_t kRoleShared = 5;

inline std::int64_t sample_message(CounterRng& rng, std::int64_t m) {
  // Rejection keeps the draw exactly uniform.
  const std::uint64_t span = static_cast<std::uint64_t>(m);
  const std::uint64_t limit = std::uint64_t(-1) - (std::uint64_t(-1) % span);
  for (;;) {
    const std::uint64_t u = rng.next_u64();
    if (u < limit) return static_cast<std::int64_t>(u % span);
  }
}

/// Exact log-probability that one fresh codeword drawn i.i.d. from input_pmf
/// lands jointly typical with a fixed y (given by its column counts) under at
/// least one state. Factorizes over output symbols: conditioned on y, the
/// codeword's joint counts are independent multinomial columns. States are
/// combined by inclusion-exclusion; each subset intersects the per-entry
/// typicality boxes. Everything stays in log space (the probabilities reach
/// e^{-1000} at realistic blocklengths).
struct EnsembleContext {
  std::int64_t n = 0;
  std::size_t nx = 0, ny = 0;
  double bound = 0.0;                        // epsilon / (nx ny)
  std::vector<double> log_input;             // log N(a), -inf at zero mass
  std::vector<std::vector<double>> joints;   // [s][a*ny+b]
};

inline double log_confusion_probability(const EnsembleContext& ctx,
                                        const std::vector<std::int64_t>& y_counts) {
  const std::size_t s_count = ctx.joints.size();
  const double nn = static_cast<double>(ctx.n);
  LogSumAcc odd, even;
  std::vector<std::int64_t> k(ctx.nx);
  for (std::uint64_t mask = 1; mask < (std::uint64_t(1) << s_count); ++mask) {
    double log_p = 0.0;
    for (std::size_t b = 0; b < ctx.ny && log_p != -kInf; ++b) {
      const std::int64_t cb = y_counts[b];
      // Per-entry admissible count ranges for this subset of states.
      std::vector<std::pair<std::int64_t, std::int64_t>> range(ctx.nx, {0, cb});
      for (std::size_t a = 0; a < ctx.nx; ++a) {
        std::int64_t lo = 0, hi = cb;
        for (std::size_t s = 0; s < s_count; ++s) {
          if (!(mask >> s & 1)) continue;
          const double p = ctx.joints[s][a * ctx.ny + b];
          if (p == 0.0) {
            hi = std::min<std::int64_t>(hi, 0);
            continue;
          }
          while (lo <= hi && !(std::abs(static_cast<double>(lo) / nn - p) < ctx.bound)) ++lo;
          while (hi >= lo && !(std::abs(static_cast<double>(hi) / nn - p) < ctx.bound)) --hi;
        }
        range[a] = {lo, hi};
      }
      // Column weight: sum over in-range count vectors with column sum cb of
      // multinomial(cb; k) * prod_a N(a)^{k_a}.
      LogSumAcc col;
      const std::function<void(std::size_t, std::int64_t, double)> rec =
          [&](std::size_t a, std::int64_t left, double acc) {
            if (a + 1 == ctx.nx) {
              if (left < range[a].first || left > range[a].second) return;
              if (left > 0 && ctx.log_input[a] == -kInf) return;
              col.add(acc - log_factorial(left) +
                      (left > 0 ? static_cast<double>(left) * ctx.log_input[a] : 0.0));
              return;
            }
            const std::int64_t lo = range[a].first;
            const std::int64_t hi = std::min(range[a].second, left);
            for (std::int64_t v = lo; v <= hi; ++v) {
              if (v > 0 && ctx.log_input[a] == -kInf) break;
              rec(a + 1, left - v,
                  acc - log_factorial(v) +
                      (v > 0 ? static_cast<double>(v) * ctx.log_input[a] : 0.0));
            }
          };
      rec(0, cb, log_factorial(cb));
      const double w = col.value();
      log_p = (w == -kInf) ? -kInf : log_p + w;
    }
    if (log_p == -kInf) continue;
    if (std::popcount(mask) % 2 == 1)
      odd.add(log_p);
    else
      even.add(log_p);
  }
  const double lp = odd.value();
  if (lp == -kInf) return -kInf;
  const double ln = even.value();
  if (ln >= lp) return -kInf;  // floating-point cancellation floor
  return lp + std::log1p(-std::exp(ln - lp));
}

/// P(at least one of the other_count i.i.d. codewords confuses), from the
/// per-codeword log-probability. log_other = log(other_count), -inf if none.
inline double confusion_union_probability(double log_p_conf, double log_other) {
  if (log_p_conf == -kInf || log_other == -kInf) return 0.0;
  double log_t;  // log(-log(1 - p_conf))
  if (log_p_conf > -30.0) {
    const double p = std::min(1.0, std::exp(log_p_conf));
    if (p >= 1.0) return 1.0;
    log_t = std::log(-std::log1p(-p));
  } else {
    log_t = log_p_conf;  // -log1p(-p) = p to within e^{-30} relative error
  }
  const double log_lambda = log_other + log_t;
  if (log_lambda > 700.0) return 1.0;
  return -std::expm1(-std::exp(log_lambda));
}

struct TrialRec {
  bool err_a = false;
  bool err_b = false;
  double v = 0.0;
  double u_conf = 0.0;
  std::vector<std::int64_t> y_counts;  // ensemble mode only
};

}  // namespace detail

/// Runs the full per-state trial loop and aggregates a report. The channel
/// state is unknown to both ends, so the loop covers every state with the
/// same trial budget. Identical configs (including seed) produce bit-identical
/// reports regardless of thread count: every trial owns RNG substreams and
/// aggregation runs in trial order.
inline SimReport run_trials(const SimConfig& config) {
  config.validate();
  const CompoundChannel& ch = config.channel;
  const std::size_t s_count = ch.num_states();
  const std::size_t nx = ch.alphabet_x().size();
  const std::size_t ny = ch.alphabet_y().size();
  const std::size_t nz = ch.alphabet_z().size();
  const std::int64_t n = config.blocklength;
  const double nn = static_cast<double>(n);

  SimReport rep;
  rep.blocklength = n;
  rep.trials_per_state = config.trials;
  rep.seed = config.seed;
  rep.rate_nats = config.rate_nats;
  rep.rate_slack = config.rate_slack;
  rep.epsilon = config.epsilon;
  rep.log_message_count = config.log_message_count();

  const double l_m = rep.log_message_count;
  double m_real = l_m > 700.0 ? kInf : std::ceil(std::exp(l_m));
  if (m_real < 1.0) m_real = 1.0;
  rep.message_count = m_real;
  const bool explicit_ok =
      std::isfinite(m_real) &&
      m_real <= static_cast<double>(config.max_codebook_symbols) / static_cast<double>(n);
  if (config.fresh_codebook) {
    rep.mode = explicit_ok ? CodebookMode::fresh_explicit : CodebookMode::fresh_ensemble;
  } else {
    if (!explicit_ok)
      throw ResourceLimitError(
          "run_trials: shared codebook exceeds the symbol memory guard and has no ensemble "
          "equivalent");
    rep.mode = CodebookMode::shared_explicit;
  }
  // Materialize the count only when it fits an int64; past that the ensemble
  // path needs nothing but log(M - 1), which l_m supplies to full precision.
  const std::int64_t m_count = m_real <= 4.0e18 ? static_cast<std::int64_t>(m_real) : -1;
  // log(number of competing codewords) for the ensemble path.
  double log_other;
  if (m_count == 1) {
    log_other = -kInf;
  } else if (m_count > 1) {
    log_other = std::log(static_cast<double>(m_count - 1));
  } else {
    log_other = l_m;  // astronomically many codewords; the -1 is immaterial
  }

  std::vector<std::vector<double>> joints(s_count);
  for (std::size_t s = 0; s < s_count; ++s)
    joints[s] = JointDistribution::chain(config.input_pmf, ch.state(s).kernel_y).probs();
  const double bound = config.epsilon / static_cast<double>(nx * ny);

  detail::EnsembleContext ens;
  ens.n = n;
  ens.nx = nx;
  ens.ny = ny;
  ens.bound = bound;
  ens.joints = joints;
  ens.log_input.resize(nx);
  for (std::size_t a = 0; a < nx; ++a)
    ens.log_input[a] = config.input_pmf[a] > 0.0 ? std::log(config.input_pmf[a]) : -kInf;

  std::optional<Codebook> shared;
  if (rep.mode == CodebookMode::shared_explicit) {
    CounterRng rng(config.seed, CounterRng::derive_stream(0, 0, detail::kRoleShared));
    shared = generate_codebook(config.input_pmf, n, m_count, rng, config.max_codebook_symbols);
  }

  const unsigned threads = resolve_thread_count(config.threads);
  rep.per_state.resize(s_count);
  for (std::size_t s = 0; s < s_count; ++s) {
    const Distribution& q_s = config.state_targets ? (*config.state_targets)[s] : *config.target;
    std::vector<detail::TrialRec> recs(static_cast<std::size_t>(config.trials));

    parallel_for(recs.size(), threads, [&](std::size_t lo, std::size_t hi) {
      std::vector<std::int64_t> counts(nx * ny);
      for (std::size_t t = lo; t < hi; ++t) {
        detail::TrialRec& rec = recs[t];
        Sequence x_sent;
        std::int64_t m_sent = 0;
        const Codebook* cb = nullptr;
        Codebook own;
        if (rep.mode == CodebookMode::fresh_ensemble) {
          CounterRng rng(config.seed, CounterRng::derive_stream(s, t, detail::kRoleCodebook));
          x_sent.resize(static_cast<std::size_t>(n));
          std::span<const double> p(config.input_pmf.probs());
          for (auto& sym : x_sent) sym = rng.sample(p);
        } else if (rep.mode == CodebookMode::fresh_explicit) {
          CounterRng rng_cb(config.seed, CounterRng::derive_stream(s, t, detail::kRoleCodebook));
          own = generate_codebook(config.input_pmf, n, m_count, rng_cb,
                                  config.max_codebook_symbols);
          cb = &own;
          CounterRng rng_m(config.seed, CounterRng::derive_stream(s, t, detail::kRoleMessage));
          m_sent = detail::sample_message(rng_m, m_count);
          x_sent = cb->words[static_cast<std::size_t>(m_sent)];
        } else {
          cb = &*shared;
          CounterRng rng_m(config.seed, CounterRng::derive_stream(s, t, detail::kRoleMessage));
          m_sent = detail::sample_message(rng_m, m_count);
          x_sent = cb->words[static_cast<std::size_t>(m_sent)];
        }

        CounterRng rng_ch(config.seed, CounterRng::derive_stream(s, t, detail::kRoleChannel));
        const auto [y, z] = transmit(x_sent, s, ch, rng_ch);

        std::fill(counts.begin(), counts.end(), 0);
        for (std::size_t i = 0; i < y.size(); ++i) ++counts[x_sent[i] * ny + y[i]];
        rec.err_a = !detail::counts_typical_any(counts, joints, n, bound);

        if (rep.mode == CodebookMode::fresh_ensemble) {
          rec.y_counts.assign(ny, 0);
          for (Symbol b : y) ++rec.y_counts[b];
          CounterRng rng_c(config.seed, CounterRng::derive_stream(s, t, detail::kRoleConfusion));
          rec.u_conf = rng_c.next_unit();
        } else {
          rec.err_b = false;
          for (std::size_t m = 0; m < cb->words.size(); ++m) {
            if (static_cast<std::int64_t>(m) == m_sent) continue;
            const Sequence& xm = cb->words[m];
            std::fill(counts.begin(), counts.end(), 0);
            for (std::size_t i = 0; i < y.size(); ++i) ++counts[xm[i] * ny + y[i]];
            if (detail::counts_typical_any(counts, joints, n, bound)) {
              rec.err_b = true;
              break;
            }
          }
        }

        std::vector<std::int64_t> z_counts(nz, 0);
        for (Symbol c : z) ++z_counts[c];
        double v = 0.0;
        for (std::size_t c = 0; c < nz; ++c)
          v += std::abs(static_cast<double>(z_counts[c]) / nn - q_s[c]);
        rec.v = v;
      }
    });

    if (rep.mode == CodebookMode::fresh_ensemble) {
      // Confusion probabilities depend on y only through its type; memoize.
      std::map<std::vector<std::int64_t>, double> memo;
      for (auto& rec : recs) {
        auto it = memo.find(rec.y_counts);
        if (it == memo.end()) {
          const double p_b = detail::confusion_union_probability(
              detail::log_confusion_probability(ens, rec.y_counts), log_other);
          it = memo.emplace(rec.y_counts, p_b).first;
        }
        rec.err_b = rec.u_conf < it->second;
      }
    }

    StateSimStats& st = rep.per_state[s];
    st.state = s;
    st.trials = config.trials;
    st.delta_checked = config.deltas ? (*config.deltas)[s]
                                     : std::numeric_limits<double>::quiet_NaN();
    st.v_histogram.assign(SimReport::kHistBins, 0);
    double v_sum = 0.0;
    for (const auto& rec : recs) {
      const bool err = rec.err_a || rec.err_b;
      st.errors += err;
      st.err_input_atypical += rec.err_a;
      st.err_confusion += rec.err_b;
      v_sum += rec.v;
      const double binw = SimReport::kHistMax / SimReport::kHistBins;
      const int bin = std::min(SimReport::kHistBins - 1,
                               static_cast<int>(std::floor(rec.v / binw)));
      ++st.v_histogram[static_cast<std::size_t>(std::max(0, bin))];
    }
    st.error_rate = static_cast<double>(st.errors) / static_cast<double>(st.trials);
    const auto [wl, wh] = wilson_interval(st.errors, st.trials);
    st.wilson_low = wl;
    st.wilson_high = wh;
    st.mean_v = v_sum / static_cast<double>(st.trials);
    if (st.trials > 1) {
      double ss = 0.0;
      for (const auto& rec : recs) ss += (rec.v - st.mean_v) * (rec.v - st.mean_v);
      st.v_std_error =
          std::sqrt(ss / static_cast<double>(st.trials - 1) / static_cast<double>(st.trials));
    }
    rep.max_state_error = std::max(rep.max_state_error, st.error_rate);
  }
  return rep;
}

/// Mean of per-position marginals: the expected type of an independent
/// (not necessarily identically distributed) sequence.
inline Distribution expected_type(const std::vector<Distribution>& per_position) {
  if (per_position.empty()) throw std::invalid_argument("expected_type: no positions");
  const std::size_t k = per_position.front().size();
  std::vector<double> mean(k, 0.0);
  for (const auto& p : per_position) {
    if (p.size() != k) throw std::invalid_argument("expected_type: alphabet size mismatch");
    for (std::size_t a = 0; a < k; ++a) mean[a] += p[a];
  }
  for (double& v : mean) v /= static_cast<double>(per_position.size());
  return Distribution(std::move(mean));
}

struct CoordinationCheckPoint {
  std::int64_t n = 0;
  double mean_v = 0.0;
  std::vector<double> exceed_prob;  // per theta
};

struct CoordinationCheckReport {
  std::vector<double> thetas;
  std::vector<CoordinationCheckPoint> points;
};

/// Empirical check that an exact-pre-image input drives the interference
/// type to the target: for x drawn i.i.d. from input, the variational
/// distance between the target and the output type of kernel(x) vanishes in
/// probability as n grows. Requires push_forward(input, kernel) to match the
/// target at the 1e-9 tolerance.
inline CoordinationCheckReport coordination_concentration_check(
    const Distribution& input, const Kernel& kernel, const Distribution& target,
    const std::vector<std::int64_t>& blocklengths, std::int64_t trials, std::uint64_t seed,
    std::vector<double> thetas = {0.01, 0.02, 0.05, 0.1, 0.2}, int threads = 0) {
  if (variational_distance(push_forward(input, kernel), target) > kExactPreimageTol)
    throw std::invalid_argument(
        "coordination_concentration_check: input is not in the exact pre-image of the target");
  if (trials < 1)
    throw std::invalid_argument("coordination_concentration_check: trials must be >= 1");
  for (std::int64_t n : blocklengths)
    if (n < 1)
      throw std::invalid_argument(
          "coordination_concentration_check: blocklengths must be >= 1");
  CoordinationCheckReport rep;
  rep.thetas = std::move(thetas);
  rep.points.resize(blocklengths.size());
  const unsigned tc = resolve_thread_count(threads);
  for (std::size_t bi = 0; bi < blocklengths.size(); ++bi) {
    const std::int64_t n = blocklengths[bi];
    std::vector<double> vs(static_cast<std::size_t>(trials));
    parallel_for(vs.size(), tc, [&](std::size_t lo, std::size_t hi) {
      std::span<const double> p(input.probs());
      for (std::size_t t = lo; t < hi; ++t) {
        CounterRng rng(seed, CounterRng::derive_stream(bi, t, detail::kRoleChannel));
        std::vector<std::int64_t> z_counts(kernel.output_size(), 0);
        for (std::int64_t i = 0; i < n; ++i) {
          const std::size_t a = rng.sample(p);
          ++z_counts[rng.sample(kernel.row(a).probs())];
        }
        double v = 0.0;
        for (std::size_t c = 0; c < z_counts.size(); ++c)
          v += std::abs(static_cast<double>(z_counts[c]) / static_cast<double>(n) - target[c]);
        vs[t] = v;
      }
    });
    CoordinationCheckPoint& pt = rep.points[bi];
    pt.n = n;
    double sum = 0.0;
    pt.exceed_prob.assign(rep.thetas.size(), 0.0);
    for (double v : vs) {
      sum += v;
      for (std::size_t th = 0; th < rep.thetas.size(); ++th)
        if (v > rep.thetas[th]) pt.exceed_prob[th] += 1.0;
    }
    pt.mean_v = sum / static_cast<double>(trials);
    for (double& e : pt.exceed_prob) e /= static_cast<double>(trials);
  }
  return rep;
}

}  // namespace coordcap
