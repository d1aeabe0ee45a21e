// Copyright 2026 The lnms authors
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <catch2/catch_amalgamated.hpp>

#include "lnms/environments.hpp"
#include "lnms/hybrid_ocp.hpp"
#include "lnms/kkt.hpp"
#include "lnms/qp.hpp"
#include "lnms/riccati.hpp"
#include "oracles.hpp"

using namespace lnms;

namespace {
DenseQp unconstrained(Mat H, Vec g) {
  DenseQp qp;
  const Index n = g.size();
  qp.H = std::move(H);
  qp.g = std::move(g);
  qp.A_eq = Mat(0, n);
  qp.b_eq = Vec(0);
  qp.A_in = Mat(0, n);
  qp.b_in = Vec(0);
  return qp;
}
}  // namespace

TEST_CASE("unconstrained minimum of z'z is the origin") {
  const auto sol = solve_qp(unconstrained(2.0 * Mat::Identity(4, 4), Vec::Zero(4)));
  REQUIRE(sol.status == QpStatus::Optimal);
  CHECK(sol.z.cwiseAbs().maxCoeff() < 1e-12);
  CHECK(sol.objective == Catch::Approx(0.0).margin(1e-12));
}

TEST_CASE("one-dimensional KKT example") {
  // min z^2 - 2z s.t. z <= 0: optimum pinned at 0 with multiplier 2
  DenseQp qp = unconstrained(Mat::Constant(1, 1, 2.0), Vec::Constant(1, -2.0));
  qp.A_in = Mat::Constant(1, 1, 1.0);
  qp.b_in = Vec::Zero(1);
  const auto sol = solve_qp(qp);
  REQUIRE(sol.status == QpStatus::Optimal);
  CHECK(std::abs(sol.z[0]) < 1e-8);
  CHECK(sol.lambda_in[0] == Catch::Approx(2.0).margin(1e-7));
  CHECK(sol.objective == Catch::Approx(0.0).margin(1e-8));
  CHECK(kkt_residuals(qp, sol).within(1e-7));
}

TEST_CASE("contradicting bounds are certified infeasible") {
  DenseQp qp = unconstrained(Mat::Constant(1, 1, 2.0), Vec::Zero(1));
  qp.A_in = Mat(2, 1);
  qp.A_in << 1.0, -1.0;
  qp.b_in = Vec(2);
  qp.b_in << 0.0, -1.0;  // z <= 0 and z >= 1
  const auto sol = solve_qp(qp);
  CHECK(sol.status == QpStatus::Infeasible);
  CHECK(sol.max_violation > 1e-7);
  CHECK(sol.infeasibility_certificate.size() > 0);
}

TEST_CASE("random unconstrained QPs match -H^-1 g") {
  Rng rng(23);
  for (int k = 0; k < 50; ++k) {
    const int n = 1 + static_cast<int>(rng.uniform(0.0, 10.0));
    Mat L(n, n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) L(i, j) = rng.uniform(-1.0, 1.0);
    Mat H = L * L.transpose() + 0.5 * Mat::Identity(n, n);
    Vec g(n);
    for (int i = 0; i < n; ++i) g[i] = rng.uniform(-3.0, 3.0);
    const auto sol = solve_qp(unconstrained(H, g));
    REQUIRE(sol.status == QpStatus::Optimal);
    const Vec ref = -H.ldlt().solve(g);
    CHECK((sol.z - ref).cwiseAbs().maxCoeff() < 1e-8);
  }
}

TEST_CASE("random constrained QPs pass the independent KKT checker") {
  Rng rng(29);
  for (int k = 0; k < 100; ++k) {
    const int n = 2 + static_cast<int>(rng.uniform(0.0, 10.0));
    const int me = k % 4 == 0 ? 1 + static_cast<int>(rng.uniform(0.0, 2.0)) : 0;
    const int mi = 1 + static_cast<int>(rng.uniform(0.0, 14.0));
    const DenseQp qp = oracles::random_feasible_qp(rng, n, me, mi);
    const auto sol = solve_qp(qp);
    REQUIRE(sol.status == QpStatus::Optimal);
    const auto rep = kkt_residuals(qp, sol);
    INFO("k=" << k << " worst=" << rep.worst());
    CHECK(rep.within(1e-7));
  }
}

TEST_CASE("adding an inequality never improves the optimum") {
  Rng rng(31);
  for (int k = 0; k < 100; ++k) {
    const int n = 2 + static_cast<int>(rng.uniform(0.0, 8.0));
    const int mi = 1 + static_cast<int>(rng.uniform(0.0, 8.0));
    DenseQp qp = oracles::random_feasible_qp(rng, n, 0, mi);
    const auto base = solve_qp(qp);
    REQUIRE(base.status == QpStatus::Optimal);

    // append one extra row; keep the anchor-free problem feasible by
    // relaxing the row until it admits the current optimum or cuts it
    DenseQp larger = qp;
    larger.A_in.conservativeResize(mi + 1, n);
    larger.b_in.conservativeResize(mi + 1);
    for (int c = 0; c < n; ++c) larger.A_in(mi, c) = rng.uniform(-1.0, 1.0);
    larger.b_in[mi] = larger.A_in.row(mi).dot(base.z) + rng.uniform(-0.4, 0.4);
    const auto cut = solve_qp(larger);
    if (cut.status != QpStatus::Optimal) continue;  // may have become infeasible
    CHECK(cut.objective >= base.objective - 1e-7);
  }
}

TEST_CASE("LP mode (zero quadratic term)") {
  // max z1 + z2 over the unit box, as min -z
  DenseQp lp = unconstrained(Mat::Zero(2, 2), Vec::Constant(2, -1.0));
  lp.A_in = Mat(4, 2);
  lp.A_in << Mat::Identity(2, 2), -Mat::Identity(2, 2);
  lp.b_in = Vec::Ones(4);
  const auto sol = solve_qp(lp);
  REQUIRE(sol.status == QpStatus::Optimal);
  CHECK(sol.z[0] == Catch::Approx(1.0).margin(1e-8));
  CHECK(sol.z[1] == Catch::Approx(1.0).margin(1e-8));
  CHECK(kkt_residuals(lp, sol).within(1e-7));
}

TEST_CASE("check_feasibility basics") {
  const DenseQp free_qp = unconstrained(Mat::Identity(2, 2), Vec::Zero(2));
  const auto ok = check_feasibility(free_qp);
  CHECK(ok.feasible);
  CHECK(ok.max_violation == 0.0);

  DenseQp conflict = unconstrained(Mat::Constant(1, 1, 2.0), Vec::Zero(1));
  conflict.A_in = Mat(2, 1);
  conflict.A_in << 1.0, -1.0;
  conflict.b_in = Vec(2);
  conflict.b_in << 0.0, -1.0;
  const auto bad = check_feasibility(conflict);
  CHECK_FALSE(bad.feasible);
  CHECK(bad.max_violation > 1e-7);
}

TEST_CASE("fixed-mode cart QP deep inside the free region is feasible") {
  const PwaSystem sys = build_cart_wall();
  const Mat Q = Mat::Identity(2, 2);
  const Mat R = Mat::Constant(1, 1, 0.001);
  const Mat P = solve_dare(sys.modes[0].A, sys.modes[0].B, Q, R);
  const HybridOcp ocp = make_hybrid_ocp(sys, 10, Q, R, 1000.0 * P);
  const Vec x_p = (Vec(2) << 0.2, 0.0).finished();

  // independent oracle: the zero-input trajectory stays in the free region
  Vec x = x_p;
  for (int t = 0; t < ocp.N; ++t) {
    REQUIRE(sys.modes[0].guard_holds(x, Vec::Zero(1)));
    x = sys.modes[0].A * x;
  }

  const DenseQp qp =
      assemble_fixed_mode_ocp(ocp, ModeSequence::constant(10, 0), x_p);
  const auto check = check_feasibility(qp);
  CHECK(check.feasible);
}

TEST_CASE("malformed problems are rejected") {
  DenseQp qp = unconstrained(Mat::Identity(2, 2), Vec::Zero(3));
  CHECK_THROWS_AS(solve_qp(qp), DimensionMismatch);
  Mat H(2, 2);
  H << 1.0, 0.5, -0.5, 1.0;  // not symmetric
  CHECK_THROWS_AS(solve_qp(unconstrained(H, Vec::Zero(2))), InvalidParameter);
}
