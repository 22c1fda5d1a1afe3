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
#include <optional>
#include <string>
#include <vector>

#include "coordcap/util.hpp"

namespace coordcap {

using Symbol = std::size_t;
using Sequence = std::vector<Symbol>;

/// Finite alphabet; labels are presentation-only and default to "0","1",...
class Alphabet {
 public:
  explicit Alphabet(std::size_t size, std::vector<std::string> labels = {})
      : size_(size), labels_(std::move(labels)) {
    if (size_ == 0) throw std::invalid_argument("Alphabet: size must be positive");
    if (!labels_.empty() && labels_.size() != size_)
      throw std::invalid_argument("Alphabet: label count does not match size");
    for (std::size_t i = 0; i < labels_.size(); ++i)
      for (std::size_t j = i + 1; j < labels_.size(); ++j)
        if (labels_[i] == labels_[j])
          throw std::invalid_argument("Alphabet: duplicate label '" + labels_[i] + "'");
  }

  std::size_t size() const { return size_; }
  std::string label(std::size_t i) const {
    if (i >= size_) throw std::invalid_argument("Alphabet: symbol index out of range");
    return labels_.empty() ? std::to_string(i) : labels_[i];
  }
  const std::vector<std::string>& labels() const { return labels_; }
  bool operator==(const Alphabet& o) const { return size_ == o.size_ && labels_ == o.labels_; }

 private:
  std::size_t size_;
  std::vector<std::string> labels_;
};

/// Probability vector over a finite alphabet. Entries are validated on
/// construction: nonnegative, sum within 1e-9 of one (then renormalized);
/// larger deviations are input errors. A present denominator n marks the
/// vector as a lattice type: every entry times n must be an integer to 1e-9.
class Distribution {
 public:
  explicit Distribution(std::vector<double> probs,
                        std::optional<std::int64_t> denominator = std::nullopt)
      : probs_(std::move(probs)), denominator_(denominator) {
    if (probs_.empty()) throw std::invalid_argument("Distribution: empty probability vector");
    double sum = 0.0;
    for (double& p : probs_) {
      if (!(p > -1e-12)) throw std::invalid_argument("Distribution: negative entry");
      if (p < 0.0) p = 0.0;
      sum += p;
    }
    if (std::abs(sum - 1.0) > kProbTol)
      throw std::invalid_argument("Distribution: entries sum to " + std::to_string(sum) +
                                  ", more than 1e-9 away from 1");
    if (sum != 1.0)
      for (double& p : probs_) p /= sum;
    if (denominator_) {
      if (*denominator_ < 1) throw std::invalid_argument("Distribution: denominator must be >= 1");
      for (double p : probs_) {
        const double scaled = p * static_cast<double>(*denominator_);
        if (std::abs(scaled - std::round(scaled)) > kProbTol)
          throw std::invalid_argument("Distribution: entry is not on the 1/" +
                                      std::to_string(*denominator_) + " lattice");
      }
    }
  }

  static Distribution uniform(std::size_t k) {
    return Distribution(std::vector<double>(k, 1.0 / static_cast<double>(k)));
  }
  static Distribution point_mass(std::size_t k, std::size_t at) {
    if (at >= k) throw std::invalid_argument("Distribution: point mass index out of range");
    std::vector<double> p(k, 0.0);
    p[at] = 1.0;
    return Distribution(std::move(p));
  }

  std::size_t size() const { return probs_.size(); }
  double operator[](std::size_t a) const { return probs_[a]; }
  const std::vector<double>& probs() const { return probs_; }
  std::optional<std::int64_t> denominator() const { return denominator_; }
  bool is_type() const { return denominator_.has_value(); }

  double min_entry() const {
    double m = kInf;
    for (double p : probs_) m = std::min(m, p);
    return m;
  }
  /// Smallest strictly positive entry; input error on the all-zero vector
  /// (impossible post-validation).
  double min_positive() const {
    double m = kInf;
    for (double p : probs_) {
      if (p > 0.0) m = std::min(m, p);
    }
    if (m == kInf) throw std::invalid_argument("Distribution: no positive entry");
    return m;
  }

 private:
  std::vector<double> probs_;
  std::optional<std::int64_t> denominator_;
};

/// Entrywise agreement within 1e-9; the relation used to match a PMF with a
/// lattice type (and vice versa).
inline bool matches(const Distribution& p, const Distribution& q) {
  if (p.size() != q.size()) throw std::invalid_argument("matches: alphabet size mismatch");
  for (std::size_t a = 0; a < p.size(); ++a)
    if (std::abs(p[a] - q[a]) > kProbTol) return false;
  return true;
}

/// Row-stochastic kernel from an input alphabet to an output alphabet.
/// Rows may be undefined (conditional types are undefined where the
/// conditioning symbol never occurs); accessing an undefined row is an error.
class Kernel {
 public:
  explicit Kernel(std::vector<Distribution> rows) {
    if (rows.empty()) throw std::invalid_argument("Kernel: no rows");
    out_size_ = rows.front().size();
    for (const auto& r : rows) {
      if (r.size() != out_size_) throw std::invalid_argument("Kernel: ragged rows");
      rows_.emplace_back(r);
    }
  }

  static Kernel with_undefined_rows(std::vector<std::optional<Distribution>> rows,
                                    std::size_t out_size) {
    if (rows.empty()) throw std::invalid_argument("Kernel: no rows");
    if (out_size == 0) throw std::invalid_argument("Kernel: empty output alphabet");
    Kernel k;
    k.out_size_ = out_size;
    for (const auto& r : rows) {
      if (r && r->size() != out_size) throw std::invalid_argument("Kernel: ragged rows");
      k.rows_.push_back(r);
    }
    return k;
  }

  static Kernel identity(std::size_t k) {
    std::vector<Distribution> rows;
    rows.reserve(k);
    for (std::size_t a = 0; a < k; ++a) rows.push_back(Distribution::point_mass(k, a));
    return Kernel(std::move(rows));
  }

  static Kernel constant_rows(const Distribution& row, std::size_t in_size) {
    return Kernel(std::vector<Distribution>(in_size, row));
  }

  std::size_t input_size() const { return rows_.size(); }
  std::size_t output_size() const { return out_size_; }
  bool row_defined(std::size_t a) const { return rows_.at(a).has_value(); }
  bool fully_defined() const {
    for (const auto& r : rows_)
      if (!r) return false;
    return true;
  }
  const Distribution& row(std::size_t a) const {
    const auto& r = rows_.at(a);
    if (!r) throw std::invalid_argument("Kernel: row " + std::to_string(a) + " is undefined");
    return *r;
  }
  double at(std::size_t a, std::size_t b) const { return row(a)[b]; }

 private:
  Kernel() = default;
  std::vector<std::optional<Distribution>> rows_;
  std::size_t out_size_ = 0;
};

/// Joint probability over a product alphabet, stored row-major.
class JointDistribution {
 public:
  JointDistribution(std::size_t nx, std::size_t ny, std::vector<double> probs,
                    std::optional<std::int64_t> denominator = std::nullopt)
      : nx_(nx), ny_(ny), flat_(Distribution(std::move(probs), denominator)) {
    if (nx_ == 0 || ny_ == 0) throw std::invalid_argument("JointDistribution: empty alphabet");
    if (flat_.size() != nx_ * ny_)
      throw std::invalid_argument("JointDistribution: size does not match alphabets");
  }

  static JointDistribution product(const Distribution& px, const Distribution& py) {
    std::vector<double> p;
    p.reserve(px.size() * py.size());
    for (std::size_t a = 0; a < px.size(); ++a)
      for (std::size_t b = 0; b < py.size(); ++b) p.push_back(px[a] * py[b]);
    return JointDistribution(px.size(), py.size(), std::move(p));
  }

  /// Chain-rule product input(a) * kernel(b|a). Rows of the kernel may be
  /// undefined only where the input puts no mass.
  static JointDistribution chain(const Distribution& input, const Kernel& kernel) {
    if (input.size() != kernel.input_size())
      throw std::invalid_argument("JointDistribution::chain: alphabet size mismatch");
    std::vector<double> p(input.size() * kernel.output_size(), 0.0);
    for (std::size_t a = 0; a < input.size(); ++a) {
      if (input[a] == 0.0) continue;
      if (!kernel.row_defined(a))
        throw std::invalid_argument(
            "JointDistribution::chain: kernel row undefined where input has mass");
      const auto& row = kernel.row(a).probs();
      for (std::size_t b = 0; b < row.size(); ++b)
        p[a * kernel.output_size() + b] = input[a] * row[b];
    }
    return JointDistribution(input.size(), kernel.output_size(), std::move(p));
  }

  std::size_t nx() const { return nx_; }
  std::size_t ny() const { return ny_; }
  double at(std::size_t a, std::size_t b) const { return flat_[a * ny_ + b]; }
  const std::vector<double>& probs() const { return flat_.probs(); }
  std::optional<std::int64_t> denominator() const { return flat_.denominator(); }

  Distribution marginal_x() const {
    std::vector<double> m(nx_, 0.0);
    for (std::size_t a = 0; a < nx_; ++a)
      for (std::size_t b = 0; b < ny_; ++b) m[a] += at(a, b);
    return Distribution(std::move(m));
  }
  Distribution marginal_y() const {
    std::vector<double> m(ny_, 0.0);
    for (std::size_t a = 0; a < nx_; ++a)
      for (std::size_t b = 0; b < ny_; ++b) m[b] += at(a, b);
    return Distribution(std::move(m));
  }

  /// Conditional kernel of the second coordinate given the first; rows are
  /// undefined where the first marginal vanishes.
  Kernel conditional_given_x() const {
    std::vector<std::optional<Distribution>> rows(nx_);
    for (std::size_t a = 0; a < nx_; ++a) {
      double mass = 0.0;
      for (std::size_t b = 0; b < ny_; ++b) mass += at(a, b);
      if (mass <= 0.0) continue;
      std::vector<double> r(ny_);
      for (std::size_t b = 0; b < ny_; ++b) r[b] = at(a, b) / mass;
      rows[a] = Distribution(std::move(r));
    }
    return Kernel::with_undefined_rows(std::move(rows), ny_);
  }

 private:
  std::size_t nx_, ny_;
  Distribution flat_;
};

/// One state of a compound channel: the communication kernel and the
/// interference kernel, both from the same input alphabet.
struct ChannelState {
  Kernel kernel_y;
  Kernel kernel_z;
};

/// Finite-state compound discrete memoryless channel. The state is fixed for
/// a whole transmission and known to no one; only the marginal kernels per
/// output are stored (all computed quantities depend on nothing else).
class CompoundChannel {
 public:
  CompoundChannel(Alphabet x, Alphabet y, Alphabet z, std::vector<ChannelState> states)
      : x_(std::move(x)), y_(std::move(y)), z_(std::move(z)), states_(std::move(states)) {
    if (states_.empty()) throw std::invalid_argument("CompoundChannel: no states");
    for (std::size_t s = 0; s < states_.size(); ++s) {
      const auto& st = states_[s];
      if (st.kernel_y.input_size() != x_.size() || st.kernel_y.output_size() != y_.size() ||
          st.kernel_z.input_size() != x_.size() || st.kernel_z.output_size() != z_.size())
        throw std::invalid_argument("CompoundChannel: state " + std::to_string(s) +
                                    " kernel dimensions do not match alphabets");
      if (!st.kernel_y.fully_defined() || !st.kernel_z.fully_defined())
        throw std::invalid_argument("CompoundChannel: state " + std::to_string(s) +
                                    " has undefined kernel rows");
    }
  }

  const Alphabet& alphabet_x() const { return x_; }
  const Alphabet& alphabet_y() const { return y_; }
  const Alphabet& alphabet_z() const { return z_; }
  std::size_t num_states() const { return states_.size(); }
  const ChannelState& state(std::size_t s) const { return states_.at(s); }
  const std::vector<ChannelState>& states() const { return states_; }

 private:
  Alphabet x_, y_, z_;
  std::vector<ChannelState> states_;
};

/// Empirical distribution of a sequence; a type with denominator n.
inline Distribution type_of_sequence(const Sequence& seq, const Alphabet& alphabet) {
  if (seq.empty()) throw std::invalid_argument("type_of_sequence: empty sequence");
  std::vector<double> counts(alphabet.size(), 0.0);
  for (Symbol s : seq) {
    if (s >= alphabet.size())
      throw std::invalid_argument("type_of_sequence: symbol out of alphabet range");
    counts[s] += 1.0;
  }
  const double n = static_cast<double>(seq.size());
  for (double& c : counts) c /= n;
  return Distribution(std::move(counts), static_cast<std::int64_t>(seq.size()));
}

/// Joint empirical distribution of two equal-length sequences.
inline JointDistribution joint_type(const Sequence& sx, const Alphabet& ax, const Sequence& sy,
                                    const Alphabet& ay) {
  if (sx.empty()) throw std::invalid_argument("joint_type: empty sequences");
  if (sx.size() != sy.size()) throw std::invalid_argument("joint_type: length mismatch");
  std::vector<double> counts(ax.size() * ay.size(), 0.0);
  for (std::size_t i = 0; i < sx.size(); ++i) {
    if (sx[i] >= ax.size() || sy[i] >= ay.size())
      throw std::invalid_argument("joint_type: symbol out of alphabet range");
    counts[sx[i] * ay.size() + sy[i]] += 1.0;
  }
  const double n = static_cast<double>(sx.size());
  for (double& c : counts) c /= n;
  return JointDistribution(ax.size(), ay.size(), std::move(counts),
                           static_cast<std::int64_t>(sx.size()));
}

/// Conditional empirical kernel of sy given sx; rows are undefined for
/// symbols that never occur in sx.
inline Kernel conditional_type(const Sequence& sy, const Alphabet& ay, const Sequence& sx,
                               const Alphabet& ax) {
  if (sx.empty()) throw std::invalid_argument("conditional_type: empty sequences");
  if (sx.size() != sy.size()) throw std::invalid_argument("conditional_type: length mismatch");
  std::vector<std::vector<std::int64_t>> counts(ax.size(),
                                                std::vector<std::int64_t>(ay.size(), 0));
  std::vector<std::int64_t> row_totals(ax.size(), 0);
  for (std::size_t i = 0; i < sx.size(); ++i) {
    if (sx[i] >= ax.size() || sy[i] >= ay.size())
      throw std::invalid_argument("conditional_type: symbol out of alphabet range");
    ++counts[sx[i]][sy[i]];
    ++row_totals[sx[i]];
  }
  std::vector<std::optional<Distribution>> rows(ax.size());
  for (std::size_t a = 0; a < ax.size(); ++a) {
    if (row_totals[a] == 0) continue;
    std::vector<double> r(ay.size());
    for (std::size_t b = 0; b < ay.size(); ++b)
      r[b] = static_cast<double>(counts[a][b]) / static_cast<double>(row_totals[a]);
    rows[a] = Distribution(std::move(r), row_totals[a]);
  }
  return Kernel::with_undefined_rows(std::move(rows), ay.size());
}

/// Variational distance: sum of absolute differences; a metric with values
/// in [0, 2].
inline double variational_distance(const Distribution& p, const Distribution& q) {
  if (p.size() != q.size())
    throw std::invalid_argument("variational_distance: alphabet size mismatch");
  double v = 0.0;
  for (std::size_t a = 0; a < p.size(); ++a) v += std::abs(p[a] - q[a]);
  return v;
}

/// Inclusive delta-neighborhood membership in variational distance.
inline bool in_delta_neighborhood(const Distribution& center, const Distribution& candidate,
                                  double delta) {
  if (delta < 0.0) throw std::invalid_argument("in_delta_neighborhood: delta must be >= 0");
  return variational_distance(center, candidate) <= delta;
}

/// Output distribution of input through kernel. Undefined rows are allowed
/// only where input puts no mass.
inline Distribution push_forward(const Distribution& input, const Kernel& kernel) {
  if (input.size() != kernel.input_size())
    throw std::invalid_argument("push_forward: alphabet size mismatch");
  std::vector<double> out(kernel.output_size(), 0.0);
  for (std::size_t a = 0; a < input.size(); ++a) {
    if (input[a] == 0.0) continue;
    if (!kernel.row_defined(a))
      throw std::invalid_argument("push_forward: kernel row undefined where input has mass");
    const auto& row = kernel.row(a).probs();
    for (std::size_t b = 0; b < row.size(); ++b) out[b] += input[a] * row[b];
  }
  return Distribution(std::move(out));
}

/// Membership of input in the delta-pre-image of target under kernel: the
/// push-forward must land within delta of the target in variational
/// distance. delta = 0 (exact pre-image) is evaluated at tolerance 1e-9.
inline bool delta_preimage_membership(const Distribution& input, const Distribution& target,
                                      const Kernel& kernel, double delta) {
  if (delta < 0.0) throw std::invalid_argument("delta_preimage_membership: delta must be >= 0");
  const double threshold = std::max(delta, kExactPreimageTol);
  return variational_distance(push_forward(input, kernel), target) <= threshold;
}

}  // namespace coordcap
