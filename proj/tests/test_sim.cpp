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

#include <cmath>
#include <cstdint>
#include <vector>

#include <catch_amalgamated.hpp>
#include "coordcap/io.hpp"
#include "coordcap/sim.hpp"
#include "coordcap/types.hpp"
#include "test_util.hpp"

namespace coordcap {
namespace {

Kernel identity2() { return Kernel::identity(2); }

Kernel bsc(double p) {
  return Kernel({Distribution({1.0 - p, p}), Distribution({p, 1.0 - p})});
}

CompoundChannel binary_channel(Kernel ky, Kernel kz) {
  return CompoundChannel(Alphabet(2), Alphabet(2), Alphabet(2),
                         {ChannelState{std::move(ky), std::move(kz)}});
}

/// Independent restatement of the pair-typicality predicate used throughout
/// this file as the reference decoder.
bool ref_pair_typical(const Sequence& x, const Sequence& y,
                      const std::vector<std::vector<double>>& joints, double epsilon,
                      std::size_t nx, std::size_t ny) {
  const double w = epsilon / static_cast<double>(nx * ny);
  const double n = static_cast<double>(x.size());
  for (const auto& j : joints) {
    bool ok = true;
    for (std::size_t a = 0; a < nx && ok; ++a) {
      for (std::size_t b = 0; b < ny && ok; ++b) {
        std::int64_t c = 0;
        for (std::size_t i = 0; i < x.size(); ++i) c += (x[i] == a && y[i] == b);
        const double jij = j[a * ny + b];
        if (jij == 0.0 && c != 0) ok = false;
        if (!(std::abs(static_cast<double>(c) / n - jij) < w)) ok = false;
      }
    }
    if (ok) return true;
  }
  return false;
}

TEST_CASE("codebook generation is shaped, deterministic, and guarded") {
  CounterRng rng(3, 7);
  const Codebook cb = generate_codebook(Distribution({0.5, 0.5}), 6, 4, rng);
  REQUIRE(cb.words.size() == 4);
  for (const auto& w : cb.words) REQUIRE(w.size() == 6);

  CounterRng rng2(3, 7);
  const Codebook cb2 = generate_codebook(Distribution({0.5, 0.5}), 6, 4, rng2);
  CHECK(cb.words == cb2.words);

  CounterRng rng3(3, 8);
  const Codebook cb3 = generate_codebook(Distribution({0.5, 0.5}), 6, 4, rng3);
  CHECK(cb.words != cb3.words);

  // A point-mass input produces the constant codeword.
  CounterRng rng4(1, 1);
  const Codebook point = generate_codebook(Distribution({1.0, 0.0}), 5, 3, rng4);
  for (const auto& w : point.words)
    for (Symbol s : w) CHECK(s == 0);

  CounterRng rng5(1, 1);
  CHECK_THROWS_AS(generate_codebook(Distribution({0.5, 0.5}), 100, 200, rng5, 1000),
                  ResourceLimitError);
  CHECK_THROWS_AS(generate_codebook(Distribution({0.5, 0.5}), 0, 1, rng5),
                  std::invalid_argument);
  CHECK_THROWS_AS(generate_codebook(Distribution({0.5, 0.5}), 5, 0, rng5),
                  std::invalid_argument);
}

TEST_CASE("noiseless transmission reproduces the codeword on both outputs") {
  const CompoundChannel ch = binary_channel(identity2(), identity2());
  CounterRng rng(11, 0);
  const Sequence x{0, 1, 1, 0, 1};
  const auto [y, z] = transmit(x, 0, ch, rng);
  CHECK(y == x);
  CHECK(z == x);
  CounterRng rng2(11, 0);
  CHECK_THROWS_AS(transmit(x, 1, ch, rng2), std::invalid_argument);
}

TEST_CASE("transmit matches single-symbol kernel frequencies") {
  const CompoundChannel ch = binary_channel(bsc(0.2), Kernel::constant_rows(
                                                          Distribution({0.3, 0.7}), 2));
  CounterRng rng(21, 5);
  const Sequence x(20000, 0);
  const auto [y, z] = transmit(x, 0, ch, rng);
  double flips = 0.0, z_ones = 0.0;
  for (Symbol b : y) flips += (b == 1);
  for (Symbol c : z) z_ones += (c == 1);
  // 5 sigma at 20000 draws: 0.2 +- 0.014, 0.7 +- 0.016.
  CHECK_THAT(flips / 20000.0, Catch::Matchers::WithinAbs(0.2, 0.015));
  CHECK_THAT(z_ones / 20000.0, Catch::Matchers::WithinAbs(0.7, 0.017));
}

TEST_CASE("pair-count typicality enforces the zero-support clause") {
  // Joint puts no mass on cell (0,1); one stray count there must reject even
  // though 1/n is far inside the width.
  const std::vector<double> j{0.5, 0.0, 0.0, 0.5};
  std::vector<std::int64_t> counts{50, 0, 0, 50};
  CHECK(detail::counts_typical(counts, j, 100, 0.05));
  counts = {49, 1, 0, 50};
  CHECK_FALSE(detail::counts_typical(counts, j, 100, 0.05));
  // The comparison is strict: sitting exactly at the width rejects.
  counts = {55, 0, 0, 45};
  CHECK_FALSE(detail::counts_typical(counts, j, 100, 0.05));
  counts = {54, 0, 0, 46};
  CHECK(detail::counts_typical(counts, j, 100, 0.05));
}

TEST_CASE("decoder resolves the three outcome kinds") {
  const Distribution pmf = Distribution::uniform(2);
  const std::vector<Kernel> ky{identity2()};
  Codebook cb{2, 4, {Sequence{0, 0, 0, 0}, Sequence{0, 1, 0, 1}}};

  // Word 1 sent noiselessly: only word 1 pairs typically with y.
  auto out = decode(Sequence{0, 1, 0, 1}, cb, pmf, ky, 0.3);
  REQUIRE(out.kind == DecodeOutcome::Kind::decoded);
  CHECK(out.message == 1);

  // All-ones received: word 0 hits the zero-support cell, word 1's type is
  // off by 1/2 in two cells. Nothing is typical.
  out = decode(Sequence{1, 1, 1, 1}, cb, pmf, ky, 0.3);
  CHECK(out.kind == DecodeOutcome::Kind::none_typical);

  // Duplicate codewords are distinct messages, so both are candidates.
  Codebook dup{2, 4, {Sequence{0, 1, 0, 1}, Sequence{0, 1, 0, 1}}};
  out = decode(Sequence{0, 1, 0, 1}, dup, pmf, ky, 0.3);
  CHECK(out.kind == DecodeOutcome::Kind::ambiguous);

  CHECK_THROWS_AS(decode(Sequence{0, 1}, cb, pmf, ky, 0.3), std::invalid_argument);
  CHECK_THROWS_AS(decode(Sequence{0, 1, 0, 1}, cb, pmf, {}, 0.3), std::invalid_argument);
}

TEST_CASE("decoder agrees with the reference predicate on every input") {
  // Exhaust all received sequences of length 6 against a fixed codebook and
  // compare with a from-scratch implementation of the decision rule.
  const Distribution pmf = Distribution::uniform(2);
  const std::vector<Kernel> kernels{bsc(0.25), bsc(0.4)};
  std::vector<std::vector<double>> joints;
  for (const auto& k : kernels)
    joints.push_back(JointDistribution::chain(pmf, k).probs());
  const Codebook cb{3, 6,
                    {Sequence{0, 0, 1, 1, 0, 1}, Sequence{1, 1, 0, 0, 1, 0},
                     Sequence{0, 1, 0, 1, 0, 1}}};
  const double epsilon = 0.9;
  for (std::uint64_t mask = 0; mask < 64; ++mask) {
    Sequence y(6);
    for (int i = 0; i < 6; ++i) y[i] = (mask >> i) & 1u;
    std::vector<std::int64_t> typical;
    for (std::size_t m = 0; m < cb.words.size(); ++m)
      if (ref_pair_typical(cb.words[m], y, joints, epsilon, 2, 2))
        typical.push_back(static_cast<std::int64_t>(m));
    const auto out = decode(y, cb, pmf, kernels, epsilon);
    if (typical.empty()) {
      CHECK(out.kind == DecodeOutcome::Kind::none_typical);
    } else if (typical.size() == 1) {
      REQUIRE(out.kind == DecodeOutcome::Kind::decoded);
      CHECK(out.message == typical[0]);
    } else {
      CHECK(out.kind == DecodeOutcome::Kind::ambiguous);
    }
  }
}

TEST_CASE("error bookkeeping equals decode-failure-or-wrong-message") {
  // The two error flags the trial loop records are exactly "the decoder
  // would not return the sent message". Replay many random trials by hand.
  const Distribution pmf = Distribution::uniform(2);
  const CompoundChannel ch = binary_channel(bsc(0.2), identity2());
  const std::vector<Kernel> kernels{ch.state(0).kernel_y};
  std::vector<std::vector<double>> joints{
      JointDistribution::chain(pmf, kernels[0]).probs()};
  const double epsilon = 0.35;
  const std::int64_t n = 8, m_count = 4;
  for (std::uint64_t t = 0; t < 500; ++t) {
    CounterRng rng_cb(9000, CounterRng::derive_stream(0, t, 1));
    const Codebook cb = generate_codebook(pmf, n, m_count, rng_cb);
    CounterRng rng_m(9000, CounterRng::derive_stream(0, t, 2));
    const std::int64_t m_sent = detail::sample_message(rng_m, m_count);
    CounterRng rng_ch(9000, CounterRng::derive_stream(0, t, 3));
    const auto [y, z] = transmit(cb.words[static_cast<std::size_t>(m_sent)], 0, ch, rng_ch);

    const bool err_a =
        !ref_pair_typical(cb.words[static_cast<std::size_t>(m_sent)], y, joints, epsilon, 2, 2);
    bool err_b = false;
    for (std::size_t m = 0; m < cb.words.size(); ++m)
      if (static_cast<std::int64_t>(m) != m_sent &&
          ref_pair_typical(cb.words[m], y, joints, epsilon, 2, 2))
        err_b = true;

    const auto out = decode(y, cb, pmf, kernels, epsilon);
    const bool fail_or_wrong =
        out.kind != DecodeOutcome::Kind::decoded || out.message != m_sent;
    REQUIRE(fail_or_wrong == (err_a || err_b));
  }
}

TEST_CASE("message sampling is uniform and exact") {
  CounterRng rng(5, 9);
  std::vector<int> hits(5, 0);
  for (int i = 0; i < 10000; ++i) ++hits[static_cast<std::size_t>(detail::sample_message(rng, 5))];
  for (int h : hits) CHECK_THAT(static_cast<double>(h), Catch::Matchers::WithinAbs(2000.0, 200.0));
  CounterRng rng2(5, 9);
  for (int i = 0; i < 10; ++i) CHECK(detail::sample_message(rng2, 1) == 0);
}

TEST_CASE("ensemble confusion probability matches exhaustive enumeration") {
  // P(fresh codeword jointly typical with a fixed y under >= 1 state),
  // enumerated over every x in {0,1}^n.
  const std::int64_t n = 5;
  const Distribution pmf({0.6, 0.4});
  const Sequence y{0, 0, 0, 1, 1};

  const auto brute = [&](const std::vector<Kernel>& kernels, double epsilon) {
    std::vector<std::vector<double>> joints;
    for (const auto& k : kernels)
      joints.push_back(JointDistribution::chain(pmf, k).probs());
    double total = 0.0;
    for (std::uint64_t mask = 0; mask < (1u << n); ++mask) {
      Sequence x(static_cast<std::size_t>(n));
      double px = 1.0;
      for (int i = 0; i < n; ++i) {
        x[static_cast<std::size_t>(i)] = (mask >> i) & 1u;
        px *= pmf[x[static_cast<std::size_t>(i)]];
      }
      if (ref_pair_typical(x, y, joints, epsilon, 2, 2)) total += px;
    }
    return total;
  };
  const auto exact = [&](const std::vector<Kernel>& kernels, double epsilon) {
    detail::EnsembleContext ctx;
    ctx.n = n;
    ctx.nx = 2;
    ctx.ny = 2;
    ctx.bound = epsilon / 4.0;
    ctx.log_input = {std::log(0.6), std::log(0.4)};
    for (const auto& k : kernels)
      ctx.joints.push_back(JointDistribution::chain(pmf, k).probs());
    std::vector<std::int64_t> y_counts(2, 0);
    for (Symbol b : y) ++y_counts[b];
    return detail::log_confusion_probability(ctx, y_counts);
  };

  for (const double epsilon : {0.4, 0.9, 1.6}) {
    const double b1 = brute({bsc(0.2)}, epsilon);
    const double e1 = exact({bsc(0.2)}, epsilon);
    if (b1 == 0.0) {
      CHECK(e1 == -kInf);
    } else {
      CHECK_THAT(std::exp(e1), Catch::Matchers::WithinRel(b1, 1e-12));
    }
    // Two states exercise the inclusion-exclusion over state subsets.
    const double b2 = brute({bsc(0.2), bsc(0.35)}, epsilon);
    const double e2 = exact({bsc(0.2), bsc(0.35)}, epsilon);
    if (b2 == 0.0) {
      CHECK(e2 == -kInf);
    } else {
      CHECK_THAT(std::exp(e2), Catch::Matchers::WithinRel(b2, 1e-12));
    }
  }

  // A width too small for the count lattice leaves nothing typical.
  CHECK(exact({bsc(0.2)}, 0.001) == -kInf);
  CHECK(brute({bsc(0.2)}, 0.001) == 0.0);

  // Zero-support input: codewords never use symbol 1.
  detail::EnsembleContext ctx;
  ctx.n = n;
  ctx.nx = 2;
  ctx.ny = 2;
  ctx.bound = 0.9 / 4.0;
  ctx.log_input = {0.0, -kInf};  // point mass on symbol 0
  ctx.joints = {JointDistribution::chain(Distribution({1.0, 0.0}), bsc(0.2)).probs()};
  std::vector<std::int64_t> y_counts{3, 2};
  double total = 0.0;
  {
    const Sequence x(static_cast<std::size_t>(n), 0);
    std::vector<std::vector<double>> joints{ctx.joints[0]};
    if (ref_pair_typical(x, y, joints, 0.9, 2, 2)) total = 1.0;
  }
  const double le = detail::log_confusion_probability(ctx, y_counts);
  if (total == 0.0) {
    CHECK(le == -kInf);
  } else {
    CHECK_THAT(std::exp(le), Catch::Matchers::WithinRel(total, 1e-12));
  }
}

TEST_CASE("union probability over many codewords is numerically stable") {
  CHECK(detail::confusion_union_probability(-kInf, std::log(100.0)) == 0.0);
  CHECK(detail::confusion_union_probability(std::log(0.5), -kInf) == 0.0);
  CHECK(detail::confusion_union_probability(0.0, std::log(5.0)) == 1.0);
  // Saturation: e^{-50} chance but e^{60} competitors.
  CHECK(detail::confusion_union_probability(-50.0, 60.0) == 1.0);
  // Small-lambda regime against the direct formula 1 - (1-p)^M.
  {
    const double log_p = -50.0, log_m = 40.0;
    const double expect = -std::expm1(std::exp(log_m) * std::log1p(-std::exp(log_p)));
    CHECK_THAT(detail::confusion_union_probability(log_p, log_m),
               Catch::Matchers::WithinRel(expect, 1e-9));
  }
  // Moderate p where the log1p branch is active.
  {
    const double p = 0.01;
    const double m = 200.0;
    const double expect = 1.0 - std::pow(1.0 - p, m);
    CHECK_THAT(detail::confusion_union_probability(std::log(p), std::log(m)),
               Catch::Matchers::WithinRel(expect, 1e-9));
  }
}

SimConfig basic_config(std::uint64_t seed) {
  CompoundChannel ch(Alphabet(2), Alphabet(2), Alphabet(2),
                     {ChannelState{bsc(0.1), identity2()},
                      ChannelState{bsc(0.3), bsc(0.1)}});
  SimConfig cfg(std::move(ch), Distribution::uniform(2), 0.25, 20, 64, seed);
  cfg.target = Distribution::uniform(2);
  cfg.deltas = std::vector<double>{0.1, 0.4};
  return cfg;
}

TEST_CASE("simulation reports are identical across thread counts") {
  SimConfig a = basic_config(42);
  a.threads = 1;
  SimConfig b = basic_config(42);
  b.threads = 8;
  const std::string ja = io::to_json(run_trials(a)).dump();
  const std::string jb = io::to_json(run_trials(b)).dump();
  CHECK(ja == jb);

  SimConfig c = basic_config(43);
  c.threads = 1;
  CHECK(ja != io::to_json(run_trials(c)).dump());
}

TEST_CASE("per-state stats are aggregated consistently") {
  const SimReport rep = run_trials(basic_config(42));
  REQUIRE(rep.per_state.size() == 2);
  CHECK(rep.mode == CodebookMode::fresh_explicit);
  double worst = 0.0;
  for (const auto& st : rep.per_state) {
    CHECK(st.trials == 64);
    CHECK(st.errors <= st.trials);
    CHECK(st.errors >= std::max(st.err_input_atypical, st.err_confusion));
    CHECK(st.errors <= st.err_input_atypical + st.err_confusion);
    CHECK_THAT(st.error_rate,
               Catch::Matchers::WithinAbs(static_cast<double>(st.errors) / 64.0, 1e-15));
    CHECK(st.wilson_low <= st.error_rate);
    CHECK(st.wilson_high >= st.error_rate);
    std::int64_t hist_total = 0;
    for (std::int64_t h : st.v_histogram) hist_total += h;
    CHECK(hist_total == st.trials);
    CHECK(st.mean_v >= 0.0);
    CHECK(st.mean_v <= 2.0);
    worst = std::max(worst, st.error_rate);
  }
  CHECK(rep.per_state[0].delta_checked == 0.1);
  CHECK(rep.per_state[1].delta_checked == 0.4);
  CHECK(rep.max_state_error == worst);
}

TEST_CASE("codebook mode selection follows size and sharing") {
  SimConfig cfg = basic_config(1);
  CHECK(run_trials(cfg).mode == CodebookMode::fresh_explicit);

  cfg.fresh_codebook = false;
  CHECK(run_trials(cfg).mode == CodebookMode::shared_explicit);

  SimConfig big = basic_config(1);
  big.rate_nats = 1.5;
  big.blocklength = 600;  // e^{600 * 1.48} codewords: past the double range
  big.trials = 8;
  const SimReport rep = run_trials(big);
  CHECK(rep.mode == CodebookMode::fresh_ensemble);
  CHECK(std::isinf(rep.message_count));
  CHECK_THAT(rep.log_message_count, Catch::Matchers::WithinAbs(600 * 1.48, 1e-9));

  SimConfig mid = basic_config(1);
  mid.rate_nats = 1.0;
  mid.blocklength = 100;  // e^{98}: finite but far past both int64 and guard
  mid.trials = 8;
  const SimReport rep2 = run_trials(mid);
  CHECK(rep2.mode == CodebookMode::fresh_ensemble);
  CHECK(std::isfinite(rep2.message_count));

  big.fresh_codebook = false;
  CHECK_THROWS_AS(run_trials(big), ResourceLimitError);
}

TEST_CASE("rate zero over a noiseless channel never errs and hits the target") {
  CompoundChannel ch = binary_channel(identity2(), identity2());
  SimConfig cfg(std::move(ch), Distribution({1.0, 0.0}), 0.0, 30, 100, 7);
  cfg.target = Distribution({1.0, 0.0});
  const SimReport rep = run_trials(cfg);
  CHECK(rep.message_count == 1.0);
  REQUIRE(rep.per_state.size() == 1);
  const auto& st = rep.per_state[0];
  CHECK(st.errors == 0);
  CHECK(st.err_input_atypical == 0);
  CHECK(st.err_confusion == 0);
  CHECK(st.mean_v == 0.0);
  CHECK(st.v_std_error == 0.0);
  CHECK(st.v_histogram[0] == st.trials);
  CHECK(rep.max_state_error == 0.0);
}

TEST_CASE("rate far above capacity drowns in confusion errors") {
  CompoundChannel ch = binary_channel(identity2(), identity2());
  SimConfig cfg(std::move(ch), Distribution::uniform(2), 1.2 * std::log(2.0), 60, 200, 11);
  cfg.target = Distribution::uniform(2);
  const SimReport rep = run_trials(cfg);
  CHECK(rep.mode == CodebookMode::fresh_ensemble);
  REQUIRE(rep.per_state.size() == 1);
  CHECK(rep.per_state[0].error_rate >= 0.9);
  // Trials whose received word is itself typical die to confusion; the
  // input-atypical cause absorbs the rest, so confusion takes a large
  // minority share rather than all of the errors.
  CHECK(rep.per_state[0].err_confusion >= 60);
  CHECK(rep.per_state[0].err_confusion + rep.per_state[0].err_input_atypical >=
        rep.per_state[0].errors);
}

TEST_CASE("ensemble mode reproduces the explicit single-codeword run exactly") {
  // With one message the explicit and ensemble paths draw the same codeword
  // from the same substream, so everything except the mode tag must match
  // bit for bit; confusion stays zero on both sides.
  auto make = [](std::int64_t max_symbols) {
    CompoundChannel ch(Alphabet(2), Alphabet(2), Alphabet(2),
                       {ChannelState{bsc(0.1), bsc(0.2)},
                        ChannelState{bsc(0.25), identity2()}});
    SimConfig cfg(std::move(ch), Distribution({0.7, 0.3}), 0.0, 50, 300, 99);
    cfg.target = Distribution::uniform(2);
    cfg.max_codebook_symbols = max_symbols;
    return cfg;
  };
  const SimReport ex = run_trials(make(10'000'000));
  const SimReport en = run_trials(make(1));
  REQUIRE(ex.mode == CodebookMode::fresh_explicit);
  REQUIRE(en.mode == CodebookMode::fresh_ensemble);
  REQUIRE(ex.per_state.size() == en.per_state.size());
  for (std::size_t s = 0; s < ex.per_state.size(); ++s) {
    const auto& a = ex.per_state[s];
    const auto& b = en.per_state[s];
    CHECK(a.errors == b.errors);
    CHECK(a.err_input_atypical == b.err_input_atypical);
    CHECK(a.err_confusion == 0);
    CHECK(b.err_confusion == 0);
    CHECK(a.mean_v == b.mean_v);
    CHECK(a.v_std_error == b.v_std_error);
    CHECK(a.v_histogram == b.v_histogram);
  }
}

TEST_CASE("ensemble and explicit modes estimate the same error rates") {
  // Same ensemble, two estimators: the explicit path scans actual fresh
  // codebooks, the ensemble path draws one codeword and Bernoulli-samples
  // the exact confusion probability. Rates must agree statistically.
  auto make = [](std::int64_t max_symbols) {
    CompoundChannel ch = binary_channel(bsc(0.25), identity2());
    const double rate = std::log(8.0) / 12.0 + 0.02;
    SimConfig cfg(std::move(ch), Distribution::uniform(2), rate, 12, 3000, 1234);
    cfg.target = Distribution::uniform(2);
    cfg.max_codebook_symbols = max_symbols;
    return cfg;
  };
  const SimReport ex = run_trials(make(10'000'000));
  const SimReport en = run_trials(make(48));
  REQUIRE(ex.mode == CodebookMode::fresh_explicit);
  REQUIRE(en.mode == CodebookMode::fresh_ensemble);
  REQUIRE(ex.message_count == en.message_count);
  const double t = 3000.0;
  auto within_5_sigma = [&](double ka, double kb) {
    const double pa = ka / t, pb = kb / t;
    const double pool = (ka + kb) / (2.0 * t);
    const double sigma = std::sqrt(std::max(1e-12, pool * (1.0 - pool) * (2.0 / t)));
    return std::abs(pa - pb) <= 5.0 * sigma;
  };
  const auto& a = ex.per_state[0];
  const auto& b = en.per_state[0];
  CHECK(within_5_sigma(static_cast<double>(a.err_input_atypical),
                       static_cast<double>(b.err_input_atypical)));
  CHECK(within_5_sigma(static_cast<double>(a.err_confusion),
                       static_cast<double>(b.err_confusion)));
  CHECK(within_5_sigma(static_cast<double>(a.errors), static_cast<double>(b.errors)));
  // Both should see a solidly interior confusion rate at this rate point.
  CHECK(a.err_confusion > 100);
  CHECK(b.err_confusion > 100);
}

TEST_CASE("per-state targets drive the distance bookkeeping") {
  CompoundChannel ch(Alphabet(2), Alphabet(2), Alphabet(2),
                     {ChannelState{bsc(0.1), Kernel::constant_rows(Distribution({1.0, 0.0}), 2)},
                      ChannelState{bsc(0.1), Kernel::constant_rows(Distribution({0.0, 1.0}), 2)}});
  SimConfig cfg(std::move(ch), Distribution::uniform(2), 0.0, 40, 50, 3);
  cfg.state_targets = std::vector<Distribution>{Distribution({1.0, 0.0}),
                                                Distribution({0.0, 1.0})};
  const SimReport rep = run_trials(cfg);
  // Each state's interference is deterministic and equals its target.
  CHECK(rep.per_state[0].mean_v == 0.0);
  CHECK(rep.per_state[1].mean_v == 0.0);
  CHECK(std::isnan(rep.per_state[0].delta_checked));
}

TEST_CASE("simulation config validation rejects malformed setups") {
  auto cfg = basic_config(1);
  cfg.target.reset();
  CHECK_THROWS_AS(run_trials(cfg), std::invalid_argument);

  cfg = basic_config(1);
  cfg.state_targets = std::vector<Distribution>{Distribution::uniform(2),
                                                Distribution::uniform(2)};
  CHECK_THROWS_AS(run_trials(cfg), std::invalid_argument);  // both target kinds

  cfg = basic_config(1);
  cfg.epsilon = 0.0;
  CHECK_THROWS_AS(run_trials(cfg), std::invalid_argument);

  cfg = basic_config(1);
  cfg.deltas = std::vector<double>{0.1};
  CHECK_THROWS_AS(run_trials(cfg), std::invalid_argument);

  cfg = basic_config(1);
  cfg.target = Distribution::uniform(3);
  CHECK_THROWS_AS(run_trials(cfg), std::invalid_argument);

  CompoundChannel ch = binary_channel(bsc(0.1), identity2());
  CHECK_THROWS_AS(SimConfig(ch, Distribution::uniform(3), 0.1, 10, 10, 1),
                  std::invalid_argument);
  CHECK_THROWS_AS(SimConfig(ch, Distribution::uniform(2), -0.1, 10, 10, 1),
                  std::invalid_argument);
  CHECK_THROWS_AS(SimConfig(ch, Distribution::uniform(2), 0.1, 0, 10, 1),
                  std::invalid_argument);
  CHECK_THROWS_AS(SimConfig(ch, Distribution::uniform(2), 0.1, 10, 0, 1),
                  std::invalid_argument);
}

TEST_CASE("expected type averages per-position marginals") {
  const Distribution a({1.0, 0.0});
  const Distribution b({0.0, 1.0});
  const Distribution m = expected_type({a, b, a, b});
  CHECK_THAT(m[0], Catch::Matchers::WithinAbs(0.5, 1e-15));
  CHECK_THROWS_AS(expected_type({}), std::invalid_argument);
  CHECK_THROWS_AS(expected_type({a, Distribution::uniform(3)}), std::invalid_argument);
}

TEST_CASE("interference concentrates on the target as blocklength grows") {
  const Kernel kz({Distribution({0.9, 0.1}), Distribution({0.2, 0.8})});
  const Distribution input = Distribution::uniform(2);
  const Distribution target = push_forward(input, kz);  // (0.55, 0.45)

  CHECK_THROWS_AS(
      coordination_concentration_check(Distribution({0.9, 0.1}), kz, Distribution::uniform(2),
                                       {10}, 10, 1),
      std::invalid_argument);

  const auto rep = coordination_concentration_check(input, kz, target, {50, 200, 800}, 400, 77);
  REQUIRE(rep.points.size() == 3);
  REQUIRE(rep.thetas.size() == 5);
  CHECK(rep.points[0].n == 50);
  CHECK(rep.points[2].n == 800);
  CHECK(rep.points[0].mean_v > rep.points[2].mean_v);
  CHECK(rep.points[2].mean_v < 0.05);
  for (const auto& pt : rep.points)
    for (double e : pt.exceed_prob) {
      CHECK(e >= 0.0);
      CHECK(e <= 1.0);
    }
  // P(V > 0.1) at n = 800 is about 0.004; even 10x slack keeps this sharp.
  const std::size_t th = 3;  // theta = 0.1
  CHECK(rep.points[2].exceed_prob[th] < 0.05);
  CHECK(rep.points[0].exceed_prob[th] >= rep.points[2].exceed_prob[th]);

  // Thread count does not change the draw.
  const auto rep2 = coordination_concentration_check(input, kz, target, {50, 200, 800}, 400, 77,
                                             {0.01, 0.02, 0.05, 0.1, 0.2}, 4);
  CHECK(rep.points[1].mean_v == rep2.points[1].mean_v);
}

TEST_CASE("seeded ensemble draws match the expected type statistically") {
  // Mean type of i.i.d. blocks: each symbol frequency concentrates on the
  // input law with standard error sqrt(p(1-p)/(n*trials)).
  const Distribution pmf({0.3, 0.7});
  const std::int64_t n = 64, trials = 500;
  std::vector<double> freq(2, 0.0);
  for (std::int64_t t = 0; t < trials; ++t) {
    CounterRng rng(31, CounterRng::derive_stream(0, static_cast<std::uint64_t>(t), 1));
    std::span<const double> p(pmf.probs());
    for (std::int64_t i = 0; i < n; ++i) ++freq[rng.sample(p)];
  }
  const double total = static_cast<double>(n * trials);
  const double se = std::sqrt(0.3 * 0.7 / total);
  CHECK_THAT(freq[0] / total, Catch::Matchers::WithinAbs(0.3, 5.0 * se));
}

}  // namespace
}  // namespace coordcap
