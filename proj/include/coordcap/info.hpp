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
#include <vector>

#include "coordcap/types.hpp"
#include "coordcap/util.hpp"

namespace coordcap {

// All information measures are in nats; convert at presentation time with
// nats_to_bits. Terms with zero probability contribute zero throughout.

inline double entropy(const Distribution& p) {
  double h = 0.0;
  for (std::size_t a = 0; a < p.size(); ++a)
    if (p[a] > 0.0) h -= p[a] * std::log(p[a]);
  return h;
}

inline double entropy(const JointDistribution& p) {
  double h = 0.0;
  for (double v : p.probs())
    if (v > 0.0) h -= v * std::log(v);
  return h;
}

/// Average row entropy of kernel under input weights. Rows may be undefined
/// only where input puts no mass.
inline double conditional_entropy(const Distribution& input, const Kernel& kernel) {
  if (input.size() != kernel.input_size())
    throw std::invalid_argument("conditional_entropy: alphabet size mismatch");
  double h = 0.0;
  for (std::size_t a = 0; a < input.size(); ++a) {
    if (input[a] == 0.0) continue;
    if (!kernel.row_defined(a))
      throw std::invalid_argument("conditional_entropy: kernel row undefined where input has mass");
    h += input[a] * entropy(kernel.row(a));
  }
  return h;
}

/// Relative entropy D(p || q); +infinity when p puts mass outside q's support.
inline double kl_divergence(const Distribution& p, const Distribution& q) {
  if (p.size() != q.size()) throw std::invalid_argument("kl_divergence: alphabet size mismatch");
  double d = 0.0;
  for (std::size_t a = 0; a < p.size(); ++a) {
    if (p[a] == 0.0) continue;
    if (q[a] == 0.0) return kInf;
    d += p[a] * std::log(p[a] / q[a]);
  }
  return d;
}

inline double kl_divergence(const JointDistribution& p, const JointDistribution& q) {
  if (p.nx() != q.nx() || p.ny() != q.ny())
    throw std::invalid_argument("kl_divergence: alphabet size mismatch");
  double d = 0.0;
  for (std::size_t i = 0; i < p.probs().size(); ++i) {
    if (p.probs()[i] == 0.0) continue;
    if (q.probs()[i] == 0.0) return kInf;
    d += p.probs()[i] * std::log(p.probs()[i] / q.probs()[i]);
  }
  return d;
}

/// Mutual information of a joint distribution: the divergence from the
/// product of its marginals. Always finite and nonnegative.
inline double mutual_information(const JointDistribution& p) {
  const Distribution px = p.marginal_x();
  const Distribution py = p.marginal_y();
  double mi = 0.0;
  for (std::size_t a = 0; a < p.nx(); ++a)
    for (std::size_t b = 0; b < p.ny(); ++b) {
      const double v = p.at(a, b);
      if (v > 0.0) mi += v * std::log(v / (px[a] * py[b]));
    }
  return std::max(0.0, mi);
}

/// Mutual information between input and the output of kernel, i.e. of the
/// chain-rule joint input(a) * kernel(b|a). Equals
/// entropy(push_forward) - conditional_entropy.
inline double mi_of_input_through(const Distribution& input, const Kernel& kernel) {
  if (input.size() != kernel.input_size())
    throw std::invalid_argument("mi_of_input_through: alphabet size mismatch");
  std::vector<double> out(kernel.output_size(), 0.0);
  for (std::size_t a = 0; a < input.size(); ++a) {
    if (input[a] == 0.0) continue;
    if (!kernel.row_defined(a))
      throw std::invalid_argument("mi_of_input_through: kernel row undefined where input has mass");
    const auto& row = kernel.row(a).probs();
    for (std::size_t b = 0; b < row.size(); ++b) out[b] += input[a] * row[b];
  }
  double mi = 0.0;
  for (std::size_t a = 0; a < input.size(); ++a) {
    if (input[a] == 0.0) continue;
    const auto& row = kernel.row(a).probs();
    for (std::size_t b = 0; b < row.size(); ++b)
      if (row[b] > 0.0) mi += input[a] * row[b] * std::log(row[b] / out[b]);
  }
  return std::max(0.0, mi);
}

/// Supergradient of N |-> mi_of_input_through(N, kernel) at input, taken
/// coordinatewise over unnormalized nonnegative vectors: component a equals
/// D(kernel row a || push-forward) - 1. On the boundary of the simplex the
/// formula is evaluated at a 1e-12-smoothed copy of input so every component
/// stays finite; *smoothed (when given) records whether that happened.
inline std::vector<double> mi_supergradient(const Distribution& input, const Kernel& kernel,
                                            bool* smoothed = nullptr) {
  if (input.size() != kernel.input_size())
    throw std::invalid_argument("mi_supergradient: alphabet size mismatch");
  if (!kernel.fully_defined())
    throw std::invalid_argument("mi_supergradient: kernel has undefined rows");
  const std::size_t k = input.size();
  std::vector<double> n(input.probs());
  bool did_smooth = false;
  for (double v : n)
    if (v <= 0.0) did_smooth = true;
  if (did_smooth) {
    double sum = 0.0;
    for (double& v : n) {
      v += 1e-12;
      sum += v;
    }
    for (double& v : n) v /= sum;
  }
  if (smoothed) *smoothed = did_smooth;
  std::vector<double> m(kernel.output_size(), 0.0);
  for (std::size_t a = 0; a < k; ++a) {
    const auto& row = kernel.row(a).probs();
    for (std::size_t b = 0; b < row.size(); ++b) m[b] += n[a] * row[b];
  }
  std::vector<double> grad(k, -1.0);
  for (std::size_t a = 0; a < k; ++a) {
    const auto& row = kernel.row(a).probs();
    for (std::size_t b = 0; b < row.size(); ++b)
      if (row[b] > 0.0) grad[a] += row[b] * std::log(row[b] / m[b]);
  }
  return grad;
}

}  // namespace coordcap
