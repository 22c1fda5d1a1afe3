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
#include <functional>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <thread>
#include <utility>
#include <vector>

namespace coordcap {

/// Raised when an operation would exceed a configured enumeration or memory guard.
struct ResourceLimitError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

inline constexpr double kInf = std::numeric_limits<double>::infinity();

/// Tolerance used when validating and comparing probability vectors.
inline constexpr double kProbTol = 1e-9;

/// Slack applied to exact pre-image (delta = 0) membership and constraints.
inline constexpr double kExactPreimageTol = 1e-9;

inline double nats_to_bits(double nats) { return nats / std::numbers::ln2_v<double>; }

/// Streaming log-sum-exp accumulator; stable under widely spread magnitudes.
class LogSumAcc {
 public:
  void add(double log_term) {
    if (log_term == -kInf) return;
    if (log_term > max_) {
      sum_ = sum_ * std::exp(max_ - log_term) + 1.0;
      max_ = log_term;
    } else {
      sum_ += std::exp(log_term - max_);
    }
  }
  /// log(sum of exp(terms)); -inf when nothing was added.
  double value() const {
    if (sum_ == 0.0) return -kInf;
    return max_ + std::log(sum_);
  }
  bool empty() const { return sum_ == 0.0; }

 private:
  double max_ = -kInf;
  double sum_ = 0.0;
};

inline double log_factorial(std::int64_t n) { return std::lgamma(static_cast<double>(n) + 1.0); }

/// 95% (or other z) Wilson score interval for a binomial proportion.
inline std::pair<double, double> wilson_interval(std::int64_t successes, std::int64_t trials,
                                                 double z = 1.959963984540054) {
  if (trials <= 0) throw std::invalid_argument("wilson_interval: trials must be positive");
  const double n = static_cast<double>(trials);
  const double p = static_cast<double>(successes) / n;
  const double z2 = z * z;
  const double denom = 1.0 + z2 / n;
  const double center = (p + z2 / (2.0 * n)) / denom;
  const double half = (z / denom) * std::sqrt(p * (1.0 - p) / n + z2 / (4.0 * n * n));
  // At the boundary counts the matching endpoint is exactly p; computing it
  // through the formula would leave rounding residue around 0 or 1.
  const double lo = successes == 0 ? 0.0 : std::max(0.0, center - half);
  const double hi = successes == trials ? 1.0 : std::min(1.0, center + half);
  return {lo, hi};
}

inline unsigned resolve_thread_count(int requested) {
  if (requested > 0) return static_cast<unsigned>(requested);
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1u : hw;
}

/// Runs fn(begin, end) over a static contiguous partition of [0, total).
/// Deterministic partitioning; callers must aggregate results by index, not
/// by completion order, to keep outputs independent of the thread count.
inline void parallel_for(std::size_t total, unsigned threads,
                         const std::function<void(std::size_t, std::size_t)>& fn) {
  threads = std::max(1u, threads);
  if (total == 0) return;
  if (threads == 1 || total < 2 * threads) {
    fn(0, total);
    return;
  }
  const std::size_t chunk = (total + threads - 1) / threads;
  std::vector<std::thread> pool;
  pool.reserve(threads);
  for (unsigned t = 0; t < threads; ++t) {
    const std::size_t lo = std::min(total, static_cast<std::size_t>(t) * chunk);
    const std::size_t hi = std::min(total, lo + chunk);
    if (lo >= hi) break;
    pool.emplace_back(fn, lo, hi);
  }
  for (auto& th : pool) th.join();
}

/// Number of ways to write n as an ordered sum of k nonnegative integers,
/// i.e. C(n+k-1, k-1), saturating at +inf instead of overflowing.
inline double composition_count(std::int64_t n, std::int64_t k) {
  if (k <= 0) throw std::invalid_argument("composition_count: k must be positive");
  double acc = 1.0;
  for (std::int64_t i = 1; i < k; ++i) {
    acc *= static_cast<double>(n + i) / static_cast<double>(i);
    if (acc > 1e18) return kInf;
  }
  return acc;
}

/// Visits every length-k vector of nonnegative integers summing to n, in
/// lexicographic order. fn receives the counts vector (reused buffer).
inline void for_each_composition(std::int64_t n, std::size_t k,
                                 const std::function<void(const std::vector<std::int64_t>&)>& fn) {
  std::vector<std::int64_t> counts(k, 0);
  const std::function<void(std::size_t, std::int64_t)> rec = [&](std::size_t pos,
                                                                 std::int64_t left) {
    if (pos + 1 == k) {
      counts[pos] = left;
      fn(counts);
      return;
    }
    for (std::int64_t c = 0; c <= left; ++c) {
      counts[pos] = c;
      rec(pos + 1, left - c);
    }
  };
  if (k == 0) throw std::invalid_argument("for_each_composition: k must be positive");
  rec(0, n);
}

}  // namespace coordcap
