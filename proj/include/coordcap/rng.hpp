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

#include <cstdint>
#include <span>
#include <stdexcept>

namespace coordcap {

/// Counter-based pseudorandom generator (splitmix64 finalizer over a keyed
/// counter). Output i depends only on (key, i), so independent substreams are
/// cheap to derive and every draw is reproducible regardless of thread
/// scheduling. Not cryptographic. Deliberately avoids std::*_distribution,
/// whose outputs are implementation-defined and would break byte-identical
/// reproducibility of simulation reports.
class CounterRng {
 public:
  CounterRng(std::uint64_t seed, std::uint64_t stream) : key_(mix(mix(seed) ^ stream)) {}

  std::uint64_t next_u64() { return mix(key_ + kGamma * ++counter_); }

  /// Uniform double in [0, 1) with 53 random bits.
  double next_unit() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  /// Inverse-CDF draw from a probability vector. The vector is assumed
  /// normalized; trailing rounding mass falls to the last positive entry.
  std::size_t sample(std::span<const double> probs) {
    if (probs.empty()) throw std::invalid_argument("CounterRng::sample: empty support");
    const double u = next_unit();
    double cum = 0.0;
    std::size_t last_positive = 0;
    bool seen_positive = false;
    for (std::size_t a = 0; a < probs.size(); ++a) {
      if (probs[a] > 0.0) {
        last_positive = a;
        seen_positive = true;
      }
      cum += probs[a];
      if (u < cum) return a;
    }
    if (!seen_positive) throw std::invalid_argument("CounterRng::sample: all-zero vector");
    return last_positive;
  }

  /// Derives a well-mixed substream id from up to three coordinates
  /// (e.g. state index, trial index, role tag).
  static std::uint64_t derive_stream(std::uint64_t a, std::uint64_t b = 0, std::uint64_t c = 0) {
    std::uint64_t h = mix(a + kGamma);
    h = mix(h ^ (b + kGamma));
    h = mix(h ^ (c + kGamma));
    return h;
  }

 private:
  static constexpr std::uint64_t kGamma = 0x9e3779b97f4a7c15ull;

  static std::uint64_t mix(std::uint64_t z) {
    z ^= z >> 30;
    z *= 0xbf58476d1ce4e5b9ull;
    z ^= z >> 27;
    z *= 0x94d049bb133111ebull;
    z ^= z >> 31;
    return z;
  }

  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

}  // namespace coordcap
