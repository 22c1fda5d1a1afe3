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
#include <cstddef>
#include <stdexcept>
#include <vector>

namespace coordcap::lp {

// Dense two-phase primal simplex over nonnegative variables, full tableau,
// Bland's rule (guarantees termination under degeneracy). Sized for the small
// polytopes this project builds: tens of variables, at most a few hundred
// rows (cut pools). Phase 1 uses one artificial per row; redundant rows are
// dropped when their artificial cannot be pivoted out.

enum class Status { optimal, infeasible, unbounded };

struct Solution {
  Status status = Status::infeasible;
  double objective = 0.0;
  std::vector<double> x;  // structural variables only
};

class Problem {
 public:
  explicit Problem(std::size_t num_vars) : n_(num_vars) {
    if (num_vars == 0) throw std::invalid_argument("lp::Problem: no variables");
  }

  std::size_t num_vars() const { return n_; }

  void add_eq(std::vector<double> coeffs, double rhs) { add_row(std::move(coeffs), rhs, true); }
  void add_le(std::vector<double> coeffs, double rhs) { add_row(std::move(coeffs), rhs, false); }

  /// min c.x subject to the accumulated rows and x >= 0.
  Solution minimize(const std::vector<double>& c) const { return solve(c, false); }
  /// max c.x subject to the accumulated rows and x >= 0.
  Solution maximize(const std::vector<double>& c) const { return solve(c, true); }

 private:
  struct Row {
    std::vector<double> a;
    double rhs;
    bool is_eq;
  };

  static constexpr double kPivotTol = 1e-9;
  static constexpr double kReducedTol = 1e-9;
  static constexpr double kFeasTol = 1e-8;

  void add_row(std::vector<double> coeffs, double rhs, bool is_eq) {
    if (coeffs.size() != n_) throw std::invalid_argument("lp::Problem: row width mismatch");
    if (!std::isfinite(rhs)) throw std::invalid_argument("lp::Problem: non-finite rhs");
    for (double v : coeffs)
      if (!std::isfinite(v)) throw std::invalid_argument("lp::Problem: non-finite coefficient");
    rows_.push_back(Row{std::move(coeffs), rhs, is_eq});
  }

  Solution solve(const std::vector<double>& c_in, bool maximize) const {
    if (c_in.size() != n_) throw std::invalid_argument("lp::Problem: objective width mismatch");
    std::vector<double> c(c_in);
    if (maximize)
      for (double& v : c) v = -v;

    std::size_t n_slack = 0;
    for (const Row& r : rows_)
      if (!r.is_eq) ++n_slack;
    const std::size_t m = rows_.size();
    const std::size_t n_struct = n_ + n_slack;
    const std::size_t width = n_struct + m + 1;  // + artificials + rhs

    // Tableau rows; rhs normalized nonnegative so artificials form a basis.
    std::vector<std::vector<double>> t(m, std::vector<double>(width, 0.0));
    std::vector<std::size_t> basis(m);
    {
      std::size_t slack_at = n_;
      for (std::size_t i = 0; i < m; ++i) {
        const Row& r = rows_[i];
        for (std::size_t j = 0; j < n_; ++j) t[i][j] = r.a[j];
        double rhs = r.rhs;
        if (!r.is_eq) t[i][slack_at++] = 1.0;
        if (rhs < 0.0) {
          for (std::size_t j = 0; j < n_struct; ++j) t[i][j] = -t[i][j];
          rhs = -rhs;
        }
        t[i][width - 1] = rhs;
        t[i][n_struct + i] = 1.0;
        basis[i] = n_struct + i;
      }
    }

    std::vector<bool> row_alive(m, true);
    const auto pivot = [&](std::size_t pr, std::size_t pc, std::vector<double>& obj) {
      const double pv = t[pr][pc];
      for (std::size_t j = 0; j < width; ++j) t[pr][j] /= pv;
      for (std::size_t i = 0; i < m; ++i) {
        if (i == pr || !row_alive[i]) continue;
        const double f = t[i][pc];
        if (f == 0.0) continue;
        for (std::size_t j = 0; j < width; ++j) t[i][j] -= f * t[pr][j];
        t[i][pc] = 0.0;
      }
      const double f = obj[pc];
      if (f != 0.0) {
        for (std::size_t j = 0; j < width; ++j) obj[j] -= f * t[pr][j];
        obj[pc] = 0.0;
      }
      basis[pr] = pc;
    };

    // Runs Bland-rule iterations to optimality over columns [0, col_limit).
    // obj holds reduced costs with the running objective negated in the rhs
    // cell. Returns false on unboundedness.
    const auto iterate = [&](std::vector<double>& obj, std::size_t col_limit) -> bool {
      const std::size_t cap = 2000 + 40 * (m + width);
      for (std::size_t it = 0; it < cap; ++it) {
        std::size_t enter = width;
        for (std::size_t j = 0; j < col_limit; ++j) {
          if (obj[j] < -kReducedTol) {
            enter = j;
            break;
          }
        }
        if (enter == width) return true;
        std::size_t leave = m;
        double best_ratio = 0.0;
        for (std::size_t i = 0; i < m; ++i) {
          if (!row_alive[i] || t[i][enter] <= kPivotTol) continue;
          const double ratio = t[i][width - 1] / t[i][enter];
          if (leave == m || ratio < best_ratio - 1e-12 ||
              (ratio < best_ratio + 1e-12 && basis[i] < basis[leave])) {
            leave = i;
            best_ratio = ratio;
          }
        }
        if (leave == m) return false;
        pivot(leave, enter, obj);
      }
      throw std::runtime_error("lp::Problem: simplex iteration cap exceeded");
    };

    const auto reduced_costs = [&](const std::vector<double>& cost_of_col) {
      std::vector<double> obj(width, 0.0);
      for (std::size_t j = 0; j < width - 1; ++j) obj[j] = cost_of_col[j];
      for (std::size_t i = 0; i < m; ++i) {
        if (!row_alive[i]) continue;
        const double cb = cost_of_col[basis[i]];
        if (cb == 0.0) continue;
        for (std::size_t j = 0; j < width; ++j) obj[j] -= cb * t[i][j];
      }
      return obj;
    };

    // Phase 1: minimize the artificial sum.
    {
      std::vector<double> cost(width, 0.0);
      for (std::size_t j = n_struct; j + 1 < width; ++j) cost[j] = 1.0;
      std::vector<double> obj = reduced_costs(cost);
      if (!iterate(obj, width - 1))
        throw std::runtime_error("lp::Problem: phase 1 reported unbounded");
      double infeas = 0.0;
      for (std::size_t i = 0; i < m; ++i)
        if (row_alive[i] && basis[i] >= n_struct) infeas += t[i][width - 1];
      if (infeas > kFeasTol) return Solution{Status::infeasible, 0.0, {}};
      // Pivot surviving artificials out; a row with no eligible pivot is a
      // redundant constraint and is dropped.
      for (std::size_t i = 0; i < m; ++i) {
        if (!row_alive[i] || basis[i] < n_struct) continue;
        std::size_t pc = width;
        for (std::size_t j = 0; j < n_struct; ++j) {
          if (std::abs(t[i][j]) > kPivotTol) {
            pc = j;
            break;
          }
        }
        if (pc == width) {
          row_alive[i] = false;
          continue;
        }
        std::vector<double> dummy(width, 0.0);
        pivot(i, pc, dummy);
      }
    }

    // Phase 2: artificial columns are barred from entering.
    {
      std::vector<double> cost(width, 0.0);
      for (std::size_t j = 0; j < n_; ++j) cost[j] = c[j];
      std::vector<double> obj = reduced_costs(cost);
      if (!iterate(obj, n_struct)) return Solution{Status::unbounded, 0.0, {}};
    }

    Solution sol;
    sol.status = Status::optimal;
    sol.x.assign(n_, 0.0);
    for (std::size_t i = 0; i < m; ++i)
      if (row_alive[i] && basis[i] < n_) sol.x[basis[i]] = std::max(0.0, t[i][width - 1]);
    double obj_val = 0.0;
    for (std::size_t j = 0; j < n_; ++j) obj_val += c_in[j] * sol.x[j];
    sol.objective = obj_val;
    return sol;
  }

  std::size_t n_;
  std::vector<Row> rows_;
};

}  // namespace coordcap::lp
