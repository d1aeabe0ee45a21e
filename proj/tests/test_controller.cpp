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

#include "lnms/bnb.hpp"
#include "lnms/controller.hpp"
#include "lnms/environments.hpp"
#include "lnms/riccati.hpp"

using namespace lnms;

namespace {

HybridOcp cart_ocp(int N) {
  const PwaSystem sys = build_cart_wall();
  const Mat Q = Mat::Identity(2, 2);
  const Mat R = Mat::Constant(1, 1, 0.001);
  const Mat P = solve_dare(sys.modes[0].A, sys.modes[0].B, Q, R);
  return make_hybrid_ocp(sys, N, Q, R, 1000.0 * P);
}

Vec vec2(double a, double b) { return (Vec(2) << a, b).finished(); }

}  // namespace

TEST_CASE("cold start invokes the MIP exactly once and stores the pair") {
  LnmsController ctl(cart_ocp(6), Vec::Ones(2));
  const auto step = ctl.control_step(vec2(0.4, 2.0));
  CHECK(step.record.mip_invoked);
  CHECK(ctl.store().size() == 1);
  CHECK(ctl.stats().mip_invocations == 1);
  CHECK(ctl.stats().qp_only_steps == 0);
}

TEST_CASE("revisiting a stored state is a pure QP step") {
  LnmsController ctl(cart_ocp(6), Vec::Ones(2));
  const Vec x = vec2(0.4, 2.0);
  const auto first = ctl.control_step(x);
  const auto second = ctl.control_step(x);
  CHECK(second.record.mip_invoked == false);
  CHECK(second.record.warm_start_feasible);
  CHECK(ctl.stats().mip_invocations == 1);
  CHECK(ctl.stats().qp_only_steps == 1);

  // the control equals the plain fixed-mode QP solution of the cached label
  const DenseQp qp = assemble_fixed_mode_ocp(ctl.ocp(), first.modes, x);
  const auto ref = solve_qp(qp);
  REQUIRE(ref.status == QpStatus::Optimal);
  CHECK(second.u0[0] == Catch::Approx(ref.z[0]).margin(1e-10));
}

TEST_CASE("infeasible cached label escalates to one MIP call") {
  LnmsController ctl(cart_ocp(6), Vec::Ones(2));
  // seed a sample whose label starts in the wall mode
  const Vec seed_x = vec2(0.749, 2.0);
  const auto seeded = ctl.control_step(seed_x);
  REQUIRE(seeded.modes.entries[0] == 1);  // drifts past the wall

  // nearby state on the other side of the guard boundary: the cached wall
  // label is infeasible there
  const Vec probe = vec2(0.55, 1.0);
  const DenseQp qp = assemble_fixed_mode_ocp(ctl.ocp(), seeded.modes, probe);
  REQUIRE_FALSE(check_feasibility(qp).feasible);

  const long mips_before = ctl.stats().mip_invocations;
  const auto step = ctl.control_step(probe);
  CHECK(step.record.mip_invoked);
  CHECK(ctl.stats().mip_invocations == mips_before + 1);
  CHECK(ctl.store().size() == 2);
}

TEST_CASE("store grows by one per step without dedup") {
  LnmsController ctl(cart_ocp(5), Vec::Ones(2), BnbConfig{}, /*dedup_exact=*/false);
  Rng rng(2);
  for (int k = 1; k <= 20; ++k) {
    ctl.control_step(vec2(rng.uniform(0.1, 0.7), rng.uniform(-5.0, 5.0)));
    CHECK(ctl.store().size() == static_cast<std::size_t>(k));
  }
  CHECK(ctl.stats().steps == 20);
  CHECK(ctl.stats().mip_invocations + ctl.stats().qp_only_steps == ctl.stats().steps);
}

TEST_CASE("one-step prediction matches the simulator") {
  LnmsController ctl(cart_ocp(8), Vec::Ones(2));
  Rng rng(13);
  for (int k = 0; k < 15; ++k) {
    const Vec x = vec2(rng.uniform(0.1, 0.75), rng.uniform(-10.0, 10.0));
    const auto step = ctl.control_step(x);
    const auto [x_next, mode] = simulate_step(ctl.ocp().system, x, step.u0);
    // the applied input must reproduce the first planned transition
    const DenseQp qp = assemble_fixed_mode_ocp(ctl.ocp(), step.modes, x);
    const auto sol = solve_qp(qp);
    REQUIRE(sol.status == QpStatus::Optimal);
    Mat u, xs;
    unpack_trajectories(ctl.ocp(), sol.z, x, u, xs);
    CHECK((x_next - xs.col(1)).cwiseAbs().maxCoeff() < 1e-6);
  }
}

TEST_CASE("infeasible states propagate as InfeasibleProblem") {
  PwaSystem sys = build_cart_wall();
  const Mat Q = Mat::Identity(2, 2);
  const Mat R = Mat::Constant(1, 1, 0.001);
  Polytope tiny = Polytope::box(vec2(-1e-4, -1e-4), vec2(1e-4, 1e-4));
  LnmsController ctl(make_hybrid_ocp(sys, 2, Q, R, Q, tiny), Vec::Ones(2));
  CHECK_THROWS_AS(ctl.control_step(vec2(0.7, 9.0)), InfeasibleProblem);
}

TEST_CASE("improvement never worsens and reaches the exhaustive optimum") {
  const HybridOcp ocp = cart_ocp(4);
  SampleStore store(Vec::Ones(2));
  Rng rng(3);

  // label random states with deliberately suboptimal feasible sequences:
  // keep the best-but-one exhaustive candidate when one exists
  int suboptimal = 0;
  while (store.size() < 12) {
    const Vec x = vec2(rng.uniform(0.3, 0.75), rng.uniform(-2.0, 10.0));
    const auto ex = enumerate_exhaustive(ocp, x);
    if (ex.status != MiqpStatus::Optimal) continue;
    ModeSequence label = ex.modes;
    double label_obj = ex.objective;
    // scan for any feasible alternative sequence
    for (int alt = 0; alt < 16; ++alt) {
      ModeSequence seq{alt & 1, (alt >> 1) & 1, (alt >> 2) & 1, (alt >> 3) & 1};
      if (seq == ex.modes) continue;
      const auto s = solve_qp(assemble_fixed_mode_ocp(ocp, seq, x));
      if (s.status == QpStatus::Optimal) {
        label = seq;
        label_obj = s.objective;
        ++suboptimal;
        break;
      }
    }
    store.insert(x, label, label_obj);
  }
  REQUIRE(suboptimal > 0);

  BnbConfig cfg;
  cfg.gap_tol = 1e-12;
  const auto report = improve_samples(store, ocp, std::nullopt, nullptr, cfg);
  REQUIRE(report.entries.size() == store.size());
  CHECK(report.skipped_count == 0);
  for (const auto& e : report.entries) {
    CHECK(e.new_objective <= e.old_objective + 1e-9);
    const auto ex = enumerate_exhaustive(ocp, store.sample(e.index).x);
    CHECK(e.new_objective == Catch::Approx(ex.objective).margin(1e-6));
  }
}

TEST_CASE("improvement with zero budget keeps feasible labels verbatim") {
  const HybridOcp ocp = cart_ocp(4);
  SampleStore store(Vec::Ones(2));
  const Vec x = vec2(0.5, 3.0);
  const auto cold = solve_bnb(ocp, x, std::nullopt, BnbConfig{});
  REQUIRE(cold.status == MiqpStatus::Optimal);
  store.insert(x, cold.modes, cold.objective);

  const auto report = improve_samples(store, ocp, 0.0);
  REQUIRE(report.entries.size() == 1);
  CHECK_FALSE(report.entries[0].changed);
  CHECK(store.sample(0).modes == cold.modes);
  CHECK(report.entries[0].new_objective <= report.entries[0].old_objective + 1e-9);
}

TEST_CASE("already-optimal labels stay unchanged under improvement") {
  const HybridOcp ocp = cart_ocp(4);
  SampleStore store(Vec::Ones(2));
  Rng rng(77);
  for (int k = 0; k < 6; ++k) {
    const Vec x = vec2(rng.uniform(0.1, 0.75), rng.uniform(-10.0, 10.0));
    const auto ex = enumerate_exhaustive(ocp, x);
    REQUIRE(ex.status == MiqpStatus::Optimal);
    store.insert(x, ex.modes, ex.objective);
  }
  BnbConfig cfg;
  cfg.gap_tol = 1e-12;
  const auto report = improve_samples(store, ocp, std::nullopt, nullptr, cfg);
  CHECK(report.changed_count == 0);
  for (const auto& e : report.entries)
    CHECK(e.new_objective == Catch::Approx(e.old_objective).margin(1e-9));
}

TEST_CASE("samples with infeasible labels are skipped, not fatal") {
  const HybridOcp ocp = cart_ocp(4);
  SampleStore store(Vec::Ones(2));
  store.insert(vec2(0.2, 0.0), ModeSequence{1, 0, 0, 0}, 0.0);  // wall unreachable
  const auto report = improve_samples(store, ocp, std::nullopt);
  REQUIRE(report.entries.size() == 1);
  CHECK(report.skipped_count == 1);
  CHECK(report.entries[0].skipped);
  CHECK(store.sample(0).modes == ModeSequence{1, 0, 0, 0});
}

TEST_CASE("improvement report CSV format") {
  ImprovementReport report;
  report.entries.push_back({0, 2.0, 1.5, true, false});
  report.entries.push_back({1, 3.0, 3.0, false, false});
  std::stringstream ss;
  report.write_csv(ss);
  std::string line;
  std::getline(ss, line);
  CHECK(line == "index,old_obj,new_obj,changed");
  std::getline(ss, line);
  CHECK(line == "0,2,1.5,1");
}
