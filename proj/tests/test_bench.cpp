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

#include <sstream>

#include "lnms/bench.hpp"

using namespace lnms;

namespace {
Vec vec2(double a, double b) { return (Vec(2) << a, b).finished(); }
}  // namespace

TEST_CASE("environment ids parse and reject") {
  CHECK(parse_environment("cart1") == EnvironmentId::Cart1);
  CHECK(parse_environment("cart2") == EnvironmentId::Cart2);
  CHECK(parse_environment("pendulum") == EnvironmentId::Pendulum);
  CHECK_THROWS_AS(parse_environment("cartpole"), InvalidParameter);
}

TEST_CASE("cart1 preset matches the default experiment parameters") {
  const BenchProblem p = make_bench_problem(EnvironmentId::Cart1);
  CHECK(p.ocp.N == 10);
  CHECK(p.ocp.R(0, 0) == 0.001);
  CHECK(p.ocp.system.num_modes() == 2);
  CHECK_FALSE(p.ocp.terminal_set.has_value());
  CHECK(p.region_lo[0] == 0.1);
  CHECK(p.region_hi[0] == 0.75);
  // terminal cost is the beta-scaled Riccati solution
  const Mat P = solve_dare(p.ocp.system.modes[0].A, p.ocp.system.modes[0].B, p.ocp.Q,
                           p.ocp.R);
  CHECK((p.ocp.P_term - 1000.0 * P).cwiseAbs().maxCoeff() < 1e-9);
}

TEST_CASE("cart2 preset uses the long horizon and tight input bound") {
  const BenchProblem p = make_bench_problem(EnvironmentId::Cart2);
  CHECK(p.ocp.N == 25);
  CHECK(p.ocp.system.num_modes() == 3);
  CHECK(p.ocp.system.u_max[0] == 10.0);
}

TEST_CASE("pendulum preset carries a control-invariant terminal set") {
  const BenchProblem p = make_bench_problem(EnvironmentId::Pendulum);
  REQUIRE(p.ocp.terminal_set.has_value());
  CHECK(p.ocp.terminal_set->num_rows() > 0);
  CHECK(p.ocp.terminal_set->contains(Vec::Zero(2)));
}

TEST_CASE("preset overrides are applied") {
  nlohmann::json ov;
  ov["N"] = 6;
  ov["beta"] = 10.0;
  ov["region_hi"] = {0.5, 5.0};
  ov["region_lo"] = {0.1, -5.0};
  const BenchProblem p = make_bench_problem(EnvironmentId::Cart1, ov);
  CHECK(p.ocp.N == 6);
  CHECK(p.region_hi[1] == 5.0);
}

TEST_CASE("rollout from the origin converges in zero steps") {
  const BenchProblem p = make_bench_problem(EnvironmentId::Cart1);
  LnmsController ctl(p.ocp, p.nn_weights);
  const auto rec = closed_loop_rollout(ctl, Vec::Zero(2), 100, 0.01);
  CHECK(rec.terminated == Termination::Converged);
  CHECK(rec.steps.empty());
}

TEST_CASE("rollout from outside the box is infeasible at step zero") {
  const BenchProblem p = make_bench_problem(EnvironmentId::Cart1);
  LnmsController ctl(p.ocp, p.nn_weights);
  const auto rec = closed_loop_rollout(ctl, vec2(3.0, 0.0), 100, 0.01);
  CHECK(rec.terminated == Termination::Infeasible);
  CHECK(rec.steps.empty());
}

TEST_CASE("rollout replay is consistent with the simulator") {
  const BenchProblem p = make_bench_problem(EnvironmentId::Cart1);
  LnmsController ctl(p.ocp, p.nn_weights);
  const auto rec = closed_loop_rollout(ctl, vec2(0.5, 4.0), 60, 0.01);
  REQUIRE(rec.steps.size() > 1);
  for (std::size_t t = 0; t + 1 < rec.steps.size(); ++t) {
    const auto [next, mode] =
        simulate_step(p.ocp.system, rec.steps[t].x, rec.steps[t].u);
    CHECK((next - rec.steps[t + 1].x).cwiseAbs().maxCoeff() < 1e-9);
    CHECK(static_cast<int>(mode) == rec.steps[t].mode);
  }
}

TEST_CASE("spearman trend statistics") {
  // strictly decreasing series: perfect negative correlation
  std::vector<double> dec{5.0, 4.0, 3.0, 2.0, 1.0, 0.5, 0.2, 0.1, 0.05, 0.01};
  const auto neg = spearman_trend(dec);
  CHECK(neg.rho == Catch::Approx(-1.0));
  CHECK(neg.p_negative_trend < 0.01);

  std::vector<double> inc{1.0, 2.0, 3.0, 4.0, 5.0};
  const auto pos = spearman_trend(inc);
  CHECK(pos.rho == Catch::Approx(1.0));
  CHECK(pos.p_negative_trend > 0.95);

  std::vector<double> flat(10, 1.0);
  const auto none = spearman_trend(flat);
  CHECK(none.rho == 0.0);
  CHECK(none.p_negative_trend == 1.0);
}

TEST_CASE("mip fraction experiment on a small cart run") {
  const BenchProblem p = make_bench_problem(EnvironmentId::Cart1);
  MipFractionParams params;
  params.n_rollouts = 8;
  params.max_steps = 40;
  params.window = 20;
  params.seed = 17;
  const auto rep = run_mip_fraction_experiment(p, params);
  CHECK(rep.total_steps > 0);
  CHECK(rep.mip_invocations + 0 <= rep.total_steps);
  CHECK(rep.mip_invocations >= 1);  // the cold start at least
  REQUIRE_FALSE(rep.window_fractions.empty());
  CHECK(rep.window_fractions.size() ==
        static_cast<std::size_t>(rep.total_steps - params.window + 1));

  // determinism: identical seeds give bitwise-identical reports
  const auto rep2 = run_mip_fraction_experiment(p, params);
  CHECK(rep.window_fractions == rep2.window_fractions);
  CHECK(rep.total_steps == rep2.total_steps);
  CHECK(rep.mip_invocations == rep2.mip_invocations);
  CHECK(bench_report_to_json(rep, true).dump() ==
        bench_report_to_json(rep2, true).dump());
}

TEST_CASE("empty experiment gives an empty report") {
  const BenchProblem p = make_bench_problem(EnvironmentId::Cart1);
  MipFractionParams params;
  params.n_rollouts = 0;
  const auto rep = run_mip_fraction_experiment(p, params);
  CHECK(rep.total_steps == 0);
  CHECK(rep.window_fractions.empty());
  CHECK(rep.sample_count == 0);
}

TEST_CASE("wallclock comparison with a single OCP is one MIP each side") {
  const BenchProblem p = make_bench_problem(EnvironmentId::Cart1);
  const auto rep = run_wallclock_comparison(p, 1, 3);
  CHECK(rep.n_ocps == 1);
  CHECK(rep.lnms_mip_calls == 1);  // empty store: the first solve is a MIP
  CHECK(rep.lnms_seconds > 0.0);
  CHECK(rep.mip_seconds > 0.0);
  // both sides solved the same single problem; allow generous jitter
  CHECK(rep.speedup_ratio > 0.1);
  CHECK(rep.speedup_ratio < 10.0);
}

TEST_CASE("wallclock instance sets are seed-deterministic") {
  const BenchProblem p = make_bench_problem(EnvironmentId::Cart1);
  const auto a = run_wallclock_comparison(p, 5, 11);
  const auto b = run_wallclock_comparison(p, 5, 11);
  CHECK(a.lnms_mip_calls == b.lnms_mip_calls);
  CHECK(a.infeasible_states == b.infeasible_states);
  // timing fields are stripped for the byte-identity contract
  CHECK(wallclock_report_to_json(a, true).dump() ==
        wallclock_report_to_json(b, true).dump());
}

TEST_CASE("partition grid of a single sample is one region") {
  SampleStore store(Vec::Ones(2));
  store.insert(vec2(0.0, 0.0), ModeSequence{0, 1}, 0.0);
  const auto grid =
      export_partition_grid(store, 11, vec2(-1.0, -1.0), vec2(1.0, 1.0));
  CHECK(grid.distinct_regions == 1);
  for (long id : grid.region_id) CHECK(id == 0);
}

TEST_CASE("two samples split the grid at the perpendicular bisector") {
  SampleStore store(Vec::Ones(2));
  store.insert(vec2(-0.5, 0.0), ModeSequence{0}, 0.0);
  store.insert(vec2(0.5, 0.0), ModeSequence{1}, 0.0);
  const auto grid =
      export_partition_grid(store, 21, vec2(-1.0, -1.0), vec2(1.0, 1.0));
  CHECK(grid.distinct_regions == 2);
  for (std::size_t k = 0; k < grid.region_id.size(); ++k) {
    const long expect = grid.x1[k] < 0.0 ? 0 : grid.x1[k] > 0.0 ? 1 : 0;
    CHECK(grid.region_id[k] == expect);
  }
}

TEST_CASE("partition export rejects bad inputs") {
  SampleStore store(Vec::Ones(2));
  CHECK_THROWS_AS(export_partition_grid(store, 11, vec2(-1, -1), vec2(1, 1)),
                  InvalidParameter);
  SampleStore store3(Vec::Ones(3));
  store3.insert(Vec::Zero(3), ModeSequence{0}, 0.0);
  CHECK_THROWS_AS(export_partition_grid(store3, 11, Vec::Zero(3), Vec::Ones(3)),
                  UnsupportedDimension);
}

TEST_CASE("partition CSV carries the documented header") {
  SampleStore store(Vec::Ones(2));
  store.insert(vec2(0.0, 0.0), ModeSequence{0}, 0.0);
  const auto grid = export_partition_grid(store, 3, vec2(-1, -1), vec2(1, 1));
  std::stringstream ss;
  write_partition_csv(grid, ss);
  std::string header;
  std::getline(ss, header);
  CHECK(header == "x1,x2,region_id,u0");
}

TEST_CASE("exact rollout and improvement agree with LNMS replay (small)") {
  const BenchProblem p = make_bench_problem(EnvironmentId::Cart1);
  BnbConfig cfg;
  cfg.gap_tol = 1e-9;
  const auto rep = lnms_exact_agreement(p, 3, 25, 0.01, 21, cfg);
  CHECK(rep.trajectories == 3);
  CHECK(rep.store_size > 0);
  CHECK(rep.max_state_deviation < 1e-4);
}
