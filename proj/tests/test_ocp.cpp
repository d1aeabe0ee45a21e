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
#include "lnms/qp.hpp"
#include "lnms/riccati.hpp"
#include "oracles.hpp"

using namespace lnms;

namespace {

HybridOcp cart_ocp(int N, double beta = 1000.0) {
  const PwaSystem sys = build_cart_wall();
  const Mat Q = Mat::Identity(2, 2);
  const Mat R = Mat::Constant(1, 1, 0.001);
  const Mat P = solve_dare(sys.modes[0].A, sys.modes[0].B, Q, R);
  return make_hybrid_ocp(sys, N, Q, R, beta * P);
}

}  // namespace

TEST_CASE("horizon-1 OCP from the origin costs nothing") {
  const HybridOcp ocp = cart_ocp(1);
  const DenseQp qp =
      assemble_fixed_mode_ocp(ocp, ModeSequence{0}, Vec::Zero(2));
  const auto sol = solve_qp(qp);
  REQUIRE(sol.status == QpStatus::Optimal);
  CHECK(std::abs(sol.z[0]) < 1e-7);
  CHECK(sol.objective == Catch::Approx(0.0).margin(1e-9));
}

TEST_CASE("pure input penalty keeps inputs at zero") {
  PwaSystem sys = build_cart_wall();
  const HybridOcp ocp =
      make_hybrid_ocp(sys, 2, Mat::Zero(2, 2), Mat::Identity(1, 1), Mat::Zero(2, 2));
  const DenseQp qp = assemble_fixed_mode_ocp(ocp, ModeSequence{0, 0},
                                             (Vec(2) << 0.3, 0.5).finished());
  const auto sol = solve_qp(qp);
  REQUIRE(sol.status == QpStatus::Optimal);
  CHECK(sol.z.head(2).cwiseAbs().maxCoeff() < 1e-7);
  CHECK(sol.objective == Catch::Approx(0.0).margin(1e-8));
}

TEST_CASE("all-free sequence matches the batch LQR oracle") {
  // boxes wide enough that no bound binds; the oracle is unconstrained
  CartWallParams params;
  params.x_min = (Vec(2) << -1e3, -1e3).finished();
  params.x_max = (Vec(2) << 1e3, 1e3).finished();
  params.u_min = Vec::Constant(1, -1e5);
  params.u_max = Vec::Constant(1, 1e5);
  const PwaSystem sys = build_cart_wall(params);
  const Mat Q = Mat::Identity(2, 2);
  const Mat R = Mat::Constant(1, 1, 0.001);
  const Mat P = solve_dare(sys.modes[0].A, sys.modes[0].B, Q, R);
  const HybridOcp ocp = make_hybrid_ocp(sys, 10, Q, R, 1000.0 * P);
  const Vec x_p = (Vec(2) << 0.5, 0.0).finished();
  const DenseQp qp =
      assemble_fixed_mode_ocp(ocp, ModeSequence::constant(10, 0), x_p);
  const auto sol = solve_qp(qp);
  REQUIRE(sol.status == QpStatus::Optimal);
  const double ref = oracles::batch_lqr_objective(
      ocp.system.modes[0].A, ocp.system.modes[0].B, ocp.Q, ocp.R, ocp.P_term, 10, x_p);
  CHECK(sol.objective == Catch::Approx(ref).margin(1e-6));
}

TEST_CASE("mode sequence validation") {
  const HybridOcp ocp = cart_ocp(3);
  CHECK_THROWS_AS(assemble_fixed_mode_ocp(ocp, ModeSequence{0, 0}, Vec::Zero(2)),
                  InvalidModeSequence);
  CHECK_THROWS_AS(assemble_fixed_mode_ocp(ocp, ModeSequence{0, 5, 0}, Vec::Zero(2)),
                  InvalidModeSequence);
}

TEST_CASE("big-M dominates sampled residuals and guard violations") {
  const HybridOcp ocp = cart_ocp(4);
  const double M = ocp.big_M;
  const PwaSystem& sys = ocp.system;
  double worst = 0.0;
  const int G = 50;
  for (int i = 0; i < G; ++i) {
    for (int j = 0; j < G; ++j) {
      for (int k = 0; k < G; ++k) {
        Vec x(2), xn(2), u(1);
        x << sys.x_min[0] + (sys.x_max[0] - sys.x_min[0]) * i / (G - 1.0),
            sys.x_min[1] + (sys.x_max[1] - sys.x_min[1]) * j / (G - 1.0);
        u << sys.u_min[0] + (sys.u_max[0] - sys.u_min[0]) * k / (G - 1.0);
        // the residual bound must hold for any admissible successor state,
        // including the box corners
        for (const PwaMode& m : sys.modes) {
          const Vec pred = m.A * x + m.B * u + m.c;
          worst = std::max(worst, (sys.x_max - pred).cwiseAbs().maxCoeff());
          worst = std::max(worst, (sys.x_min - pred).cwiseAbs().maxCoeff());
          if (m.num_guard_rows() > 0)
            worst = std::max(worst, m.guard_values(x, u).maxCoeff());
        }
      }
    }
  }
  CHECK(M >= worst);
}

TEST_CASE("big-M of a degenerate system reduces to the box radius") {
  PwaSystem sys;
  sys.n_x = 1;
  sys.n_u = 1;
  sys.dt = 1.0;
  sys.x_min = Vec::Constant(1, -1.0);
  sys.x_max = Vec::Constant(1, 1.0);
  sys.u_min = Vec::Constant(1, -1.0);
  sys.u_max = Vec::Constant(1, 1.0);
  PwaMode m;
  m.A = Mat::Zero(1, 1);
  m.B = Mat::Zero(1, 1);
  m.c = Vec::Zero(1);
  m.guard_H = Mat::Constant(1, 1, 1.0);  // x <= 1, never violated on the box
  m.guard_J = Mat::Zero(1, 1);
  m.guard_k = Vec::Constant(1, 1.0);
  sys.modes = {m};
  HybridOcp ocp;
  ocp.system = sys;
  ocp.N = 1;
  ocp.Q = Mat::Identity(1, 1);
  ocp.R = Mat::Identity(1, 1);
  ocp.P_term = Mat::Identity(1, 1);
  ocp.big_M = 1.0;
  CHECK(compute_big_m(ocp) == Catch::Approx(1.1));
}

TEST_CASE("big-M scales with the box for linear residual terms") {
  PwaSystem sys = build_cart_wall();
  for (PwaMode& m : sys.modes) {
    m.c.setZero();
    m.guard_k.setZero();
  }
  HybridOcp ocp;
  ocp.system = sys;
  ocp.N = 1;
  ocp.Q = Mat::Identity(2, 2);
  ocp.R = Mat::Identity(1, 1);
  ocp.P_term = Mat::Identity(2, 2);
  ocp.big_M = 1.0;
  const double m1 = compute_big_m(ocp);
  ocp.system.x_min *= 2.0;
  ocp.system.x_max *= 2.0;
  ocp.system.u_min *= 2.0;
  ocp.system.u_max *= 2.0;
  const double m2 = compute_big_m(ocp);
  CHECK(m2 >= 2.0 * m1 - 1e-12);
}

TEST_CASE("big-M requires finite boxes") {
  PwaSystem sys = build_cart_wall();
  sys.x_max[1] = std::numeric_limits<double>::infinity();
  HybridOcp ocp;
  ocp.system = sys;
  ocp.N = 1;
  ocp.Q = Mat::Identity(2, 2);
  ocp.R = Mat::Identity(1, 1);
  ocp.P_term = Mat::Identity(2, 2);
  ocp.big_M = 1.0;
  CHECK_THROWS_AS(compute_big_m(ocp), UnboundedBox);
}

TEST_CASE("solution audit flags violated guards") {
  const HybridOcp ocp = cart_ocp(2);
  const Vec x_p = (Vec(2) << 0.2, 0.0).finished();
  const ModeSequence modes{0, 0};
  const DenseQp qp = assemble_fixed_mode_ocp(ocp, modes, x_p);
  const auto sol = solve_qp(qp);
  REQUIRE(sol.status == QpStatus::Optimal);
  Mat u, x;
  unpack_trajectories(ocp, sol.z, x_p, u, x);
  const auto good = audit_solution(ocp, modes, u, x);
  CHECK(good.within(1e-6));
  CHECK(good.objective == Catch::Approx(sol.objective).margin(1e-8));

  // breaking the trajectory shows up in the audit
  Mat x_bad = x;
  x_bad.col(1)[0] += 0.5;
  const auto bad = audit_solution(ocp, modes, u, x_bad);
  CHECK(bad.dynamics_residual > 0.1);
}
