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

#include <catch_amalgamated.hpp>

#include "coordcap/lp.hpp"

using namespace coordcap::lp;
using Catch::Matchers::WithinAbs;

TEST_CASE("two-variable maximization with inequality rows") {
  // max x + 2y  s.t.  x + y <= 4, y <= 3, x,y >= 0  -> (1,3), objective 7.
  Problem p(2);
  p.add_le({1.0, 1.0}, 4.0);
  p.add_le({0.0, 1.0}, 3.0);
  Solution s = p.maximize({1.0, 2.0});
  REQUIRE(s.status == Status::optimal);
  CHECK_THAT(s.objective, WithinAbs(7.0, 1e-9));
  CHECK_THAT(s.x[0], WithinAbs(1.0, 1e-9));
  CHECK_THAT(s.x[1], WithinAbs(3.0, 1e-9));
}

TEST_CASE("minimization with equality rows") {
  // min 3x + 2y  s.t.  x + y = 5, x <= 3: everything lands on the cheaper
  // variable, so x=0, y=5, objective 10.
  Problem p(2);
  p.add_eq({1.0, 1.0}, 5.0);
  p.add_le({1.0, 0.0}, 3.0);
  Solution s = p.minimize({3.0, 2.0});
  REQUIRE(s.status == Status::optimal);
  CHECK_THAT(s.x[0] + s.x[1], WithinAbs(5.0, 1e-9));
  CHECK_THAT(s.x[0], WithinAbs(0.0, 1e-9));
  CHECK_THAT(s.x[1], WithinAbs(5.0, 1e-9));
  CHECK_THAT(s.objective, WithinAbs(10.0, 1e-9));
}

TEST_CASE("infeasible system is detected") {
  Problem p(1);
  p.add_eq({1.0}, 2.0);
  p.add_le({1.0}, 1.0);
  Solution s = p.minimize({1.0});
  CHECK(s.status == Status::infeasible);
}

TEST_CASE("unbounded direction is detected") {
  Problem p(2);
  p.add_le({1.0, -1.0}, 1.0);
  Solution s = p.maximize({1.0, 1.0});
  CHECK(s.status == Status::unbounded);
}

TEST_CASE("redundant equality rows are tolerated") {
  // The same row twice: phase one leaves a dead artificial on one of them.
  Problem p(2);
  p.add_eq({1.0, 1.0}, 1.0);
  p.add_eq({1.0, 1.0}, 1.0);
  p.add_eq({2.0, 2.0}, 2.0);
  Solution s = p.maximize({1.0, 0.0});
  REQUIRE(s.status == Status::optimal);
  CHECK_THAT(s.objective, WithinAbs(1.0, 1e-9));
  CHECK_THAT(s.x[0], WithinAbs(1.0, 1e-9));
}

TEST_CASE("simplex-shaped polytope with split variables") {
  // The solver's polytope pattern: n on the probability simplex, u - v free
  // splits, plus an l1 budget row sum(u + v) <= delta.
  //   vars: n0 n1 u v
  //   n0 + n1 = 1; 0.5 n0 + 0.2 n1 - u + v = 0.4; u + v <= 0.1
  // maximize n0: u - v = 0.5 n0 + 0.2 n1 - 0.4 with |u| + |v| <= 0.1
  // n0 = 1 gives residual 0.1, within budget -> optimum n0 = 1.
  Problem p(4);
  p.add_eq({1.0, 1.0, 0.0, 0.0}, 1.0);
  p.add_eq({0.5, 0.2, -1.0, 1.0}, 0.4);
  p.add_le({0.0, 0.0, 1.0, 1.0}, 0.1);
  Solution s = p.maximize({1.0, 0.0, 0.0, 0.0});
  REQUIRE(s.status == Status::optimal);
  CHECK_THAT(s.objective, WithinAbs(1.0, 1e-9));

  SECTION("shrinking the budget binds the objective") {
    Problem q(4);
    q.add_eq({1.0, 1.0, 0.0, 0.0}, 1.0);
    q.add_eq({0.5, 0.2, -1.0, 1.0}, 0.4);
    q.add_le({0.0, 0.0, 1.0, 1.0}, 0.04);
    Solution t = q.maximize({1.0, 0.0, 0.0, 0.0});
    REQUIRE(t.status == Status::optimal);
    // 0.5 n0 + 0.2 (1 - n0) <= 0.44  ->  n0 <= 0.8.
    CHECK_THAT(t.objective, WithinAbs(0.8, 1e-9));
  }
}

TEST_CASE("degenerate vertices do not cycle") {
  // Klee-Minty-style pressure in miniature plus duplicated constraints.
  Problem p(3);
  p.add_le({1.0, 0.0, 0.0}, 1.0);
  p.add_le({4.0, 1.0, 0.0}, 8.0);
  p.add_le({8.0, 4.0, 1.0}, 16.0);
  p.add_le({8.0, 4.0, 1.0}, 16.0);
  Solution s = p.maximize({4.0, 2.0, 1.0});
  REQUIRE(s.status == Status::optimal);
  CHECK_THAT(s.objective, WithinAbs(16.0, 1e-8));
}

TEST_CASE("solutions are reported for structural variables only") {
  Problem p(2);
  p.add_le({1.0, 2.0}, 2.0);
  Solution s = p.maximize({0.0, 1.0});
  REQUIRE(s.status == Status::optimal);
  CHECK(s.x.size() == 2);
  CHECK_THAT(s.x[1], WithinAbs(1.0, 1e-9));
  for (double v : s.x) CHECK(v >= 0.0);
}
