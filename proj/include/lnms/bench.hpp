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

#pragma once

#include <json.hpp>

#include <boost/math/distributions/students_t.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <map>
#include <numeric>
#include <optional>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include "lnms/controller.hpp"
#include "lnms/environments.hpp"
#include "lnms/errors.hpp"
#include "lnms/invariant_set.hpp"
#include "lnms/riccati.hpp"
#include "lnms/types.hpp"

namespace lnms {

enum class EnvironmentId { Cart1, Cart2, Pendulum };

inline EnvironmentId parse_environment(const std::string& name) {
  if (name == "cart1") return EnvironmentId::Cart1;
  if (name == "cart2") return EnvironmentId::Cart2;
  if (name == "pendulum") return EnvironmentId::Pendulum;
  throw InvalidParameter("unknown environment id: " + name);
}

inline const char* to_string(EnvironmentId id) {
  switch (id) {
    case EnvironmentId::Cart1: return "cart1";
    case EnvironmentId::Cart2: return "cart2";
    case EnvironmentId::Pendulum: return "pendulum";
  }
  return "?";
}

/// A benchmark-ready problem: the OCP plus its initial-state sampling
/// region and the NN metric weights.
struct BenchProblem {
  std::string environment;
  HybridOcp ocp;
  Vec region_lo, region_hi;
  Vec nn_weights;
};

namespace detail {

inline Vec json_vec(const nlohmann::json& j) { return array_to_vector(j); }

template <typename T>
inline T json_or(const nlohmann::json& j, const std::string& key, T fallback) {
  if (j.contains(key)) return j.at(key).get<T>();
  return fallback;
}

}  // namespace detail

/**
 * @brief Benchmark problem presets with optional JSON overrides.
 *
 * Recognized override keys: environment parameters (m, eps, x_wall, dt, l,
 * g, k, d, x_min, x_max, u_min, u_max), OCP parameters (N, r_weight,
 * beta, big_m, use_terminal_set), sampling region (region_lo, region_hi)
 * and nn_weights.
 */
inline BenchProblem make_bench_problem(EnvironmentId id,
                                       const nlohmann::json& overrides = {}) {
  using detail::json_or;
  BenchProblem out;
  out.environment = to_string(id);

  PwaSystem sys;
  int N = 10;
  double r_weight = 0.001;
  double beta = 1000.0;
  bool use_terminal_set = false;

  if (id == EnvironmentId::Cart1 || id == EnvironmentId::Cart2) {
    CartWallParams p;
    p.n_walls = id == EnvironmentId::Cart1 ? 1 : 2;
    p.m = json_or(overrides, "m", p.m);
    p.eps = json_or(overrides, "eps", p.eps);
    p.dt = json_or(overrides, "dt", p.dt);
    p.x_wall = json_or(overrides, "x_wall", p.x_wall);
    if (id == EnvironmentId::Cart2) {
      p.x_max = (Vec(2) << 1.0, 12.0).finished();
      p.x_min = -p.x_max;
      p.u_max = Vec::Constant(1, 10.0);
      p.u_min = -p.u_max;
    }
    if (overrides.contains("x_min")) p.x_min = detail::json_vec(overrides.at("x_min"));
    if (overrides.contains("x_max")) p.x_max = detail::json_vec(overrides.at("x_max"));
    if (overrides.contains("u_min")) p.u_min = detail::json_vec(overrides.at("u_min"));
    if (overrides.contains("u_max")) p.u_max = detail::json_vec(overrides.at("u_max"));
    sys = build_cart_wall(p);
    if (id == EnvironmentId::Cart1) {
      out.region_lo = (Vec(2) << 0.1, -10.0).finished();
      out.region_hi = (Vec(2) << 0.75, 10.0).finished();
    } else {
      N = 25;
      out.region_lo = (Vec(2) << -0.65, -8.0).finished();
      out.region_hi = (Vec(2) << 0.65, 8.0).finished();
    }
  } else {
    ElasticPendulumParams p;
    p.m = json_or(overrides, "m", p.m);
    p.l = json_or(overrides, "l", p.l);
    p.g = json_or(overrides, "g", p.g);
    p.k = json_or(overrides, "k", p.k);
    p.d = json_or(overrides, "d", p.d);
    p.dt = json_or(overrides, "dt", p.dt);
    if (overrides.contains("x_min")) p.x_min = detail::json_vec(overrides.at("x_min"));
    if (overrides.contains("x_max")) p.x_max = detail::json_vec(overrides.at("x_max"));
    if (overrides.contains("u_min")) p.u_min = detail::json_vec(overrides.at("u_min"));
    if (overrides.contains("u_max")) p.u_max = detail::json_vec(overrides.at("u_max"));
    sys = build_elastic_pendulum(p);
    N = 16;
    r_weight = 0.01;
    beta = 1.0;
    use_terminal_set = true;
    out.region_lo = (Vec(2) << -0.12, -0.55).finished();
    out.region_hi = (Vec(2) << 0.15, 0.3).finished();
  }

  N = json_or(overrides, "N", N);
  r_weight = json_or(overrides, "r_weight", r_weight);
  beta = json_or(overrides, "beta", beta);
  use_terminal_set = json_or(overrides, "use_terminal_set", use_terminal_set);
  if (overrides.contains("region_lo"))
    out.region_lo = detail::json_vec(overrides.at("region_lo"));
  if (overrides.contains("region_hi"))
    out.region_hi = detail::json_vec(overrides.at("region_hi"));

  const Mat Q = Mat::Identity(sys.n_x, sys.n_x);
  const Mat R = Mat::Constant(1, 1, r_weight);
  const Mat& A1 = sys.modes[0].A;
  const Mat& B1 = sys.modes[0].B;
  const Mat P = solve_dare(A1, B1, Q, R);

  std::optional<Polytope> terminal;
  if (use_terminal_set) {
    const Mat K = lqr_gain(A1, B1, R, P);
    const Mat A_cl = A1 - B1 * K;
    // mode-1 region under u = -Kx, intersected with the state box
    const PwaMode& m0 = sys.modes[0];
    Polytope guard;
    guard.F = m0.guard_H - m0.guard_J * K;
    guard.g = m0.guard_k;
    const Polytope constraints =
        Polytope::stack(Polytope::box(sys.x_min, sys.x_max), guard);
    InvariantSetResult inv = compute_invariant_set(A_cl, constraints);
    if (!inv.converged)
      log_info("make_bench_problem: invariant set iteration not converged");
    terminal = inv.set;
  }

  std::optional<double> big_m;
  if (overrides.contains("big_m")) big_m = overrides.at("big_m").get<double>();
  out.ocp = make_hybrid_ocp(std::move(sys), N, Q, R, beta * P, std::move(terminal),
                            big_m);

  out.nn_weights = Vec::Ones(out.ocp.system.n_x);
  if (overrides.contains("nn_weights"))
    out.nn_weights = detail::json_vec(overrides.at("nn_weights"));

  if (out.region_lo.size() != out.ocp.system.n_x ||
      out.region_hi.size() != out.ocp.system.n_x ||
      ((out.region_hi - out.region_lo).array() < 0.0).any() ||
      ((out.region_lo - out.ocp.system.x_min).array() < 0.0).any() ||
      ((out.ocp.system.x_max - out.region_hi).array() < 0.0).any())
    throw InvalidRegion("make_bench_problem: sampling region outside state bounds");
  return out;
}

enum class Termination { Converged, MaxSteps, Infeasible };

inline const char* to_string(Termination t) {
  switch (t) {
    case Termination::Converged: return "Converged";
    case Termination::MaxSteps: return "MaxSteps";
    case Termination::Infeasible: return "Infeasible";
  }
  return "?";
}

struct RolloutStep {
  Vec x;              ///< state the input was computed at
  Vec u;
  int mode = 0;       ///< active mode of the executed step
  bool mip_invoked = false;
  double solve_time = 0.0;
};

struct RolloutRecord {
  Vec x0;
  std::vector<RolloutStep> steps;
  Vec final_x;
  Termination terminated = Termination::MaxSteps;
};

inline nlohmann::json rollout_to_json(const RolloutRecord& r, bool strip_timing = false) {
  nlohmann::json steps = nlohmann::json::array();
  for (const auto& s : r.steps)
    steps.push_back({{"x", detail::vector_to_array(s.x)},
                     {"u", detail::vector_to_array(s.u)},
                     {"mode", s.mode},
                     {"mip_invoked", s.mip_invoked},
                     {"solve_time_s", strip_timing ? 0.0 : s.solve_time}});
  return nlohmann::json{{"x0", detail::vector_to_array(r.x0)},
                        {"final_x", detail::vector_to_array(r.final_x)},
                        {"terminated", to_string(r.terminated)},
                        {"steps", steps}};
}

/**
 * @brief Closed-loop run of the LNMS controller from x0.
 *
 * Stops when ||x||_2 drops below convergence_eps (Converged), after
 * max_steps, or when the controller proves the current state infeasible.
 */
inline RolloutRecord closed_loop_rollout(LnmsController& controller, const Vec& x0,
                                         int max_steps, double convergence_eps) {
  RolloutRecord rec;
  rec.x0 = x0;
  Vec x = x0;
  rec.final_x = x;
  if (!controller.ocp().system.in_state_bounds(x0)) {
    rec.terminated = Termination::Infeasible;
    return rec;
  }
  for (int t = 0; t < max_steps; ++t) {
    if (x.norm() < convergence_eps) {
      rec.terminated = Termination::Converged;
      return rec;
    }
    ControlStepResult step;
    try {
      step = controller.control_step(x);
    } catch (const InfeasibleProblem&) {
      rec.terminated = Termination::Infeasible;
      return rec;
    }
    const auto [x_next, mode] = simulate_step(controller.ocp().system, x, step.u0);
    rec.steps.push_back(RolloutStep{x, step.u0, static_cast<int>(mode),
                                    step.record.mip_invoked, step.record.solve_time});
    x = x_next;
    rec.final_x = x;
  }
  rec.terminated = x.norm() < convergence_eps ? Termination::Converged
                                              : Termination::MaxSteps;
  return rec;
}

/// Closed-loop run of the exact hybrid MPC (cold branch and bound every
/// step, no sequence cache). When `fill` is given, each visited state and
/// its optimal sequence are added to that store.
inline RolloutRecord exact_mpc_rollout(const HybridOcp& ocp, const Vec& x0,
                                       int max_steps, double convergence_eps,
                                       const BnbConfig& config = {},
                                       SampleStore* fill = nullptr) {
  RolloutRecord rec;
  rec.x0 = x0;
  Vec x = x0;
  rec.final_x = x;
  if (!ocp.system.in_state_bounds(x0)) {
    rec.terminated = Termination::Infeasible;
    return rec;
  }
  for (int t = 0; t < max_steps; ++t) {
    if (x.norm() < convergence_eps) {
      rec.terminated = Termination::Converged;
      return rec;
    }
    const MiqpSolution sol = solve_bnb(ocp, x, std::nullopt, config);
    if (!sol.feasible_found()) {
      rec.terminated = Termination::Infeasible;
      return rec;
    }
    if (fill) fill->insert(x, sol.modes, sol.objective);
    const Vec u0 = sol.u.col(0);
    const auto [x_next, mode] = simulate_step(ocp.system, x, u0);
    rec.steps.push_back(RolloutStep{x, u0, static_cast<int>(mode), true, sol.solve_time});
    x = x_next;
    rec.final_x = x;
  }
  rec.terminated = x.norm() < convergence_eps ? Termination::Converged
                                              : Termination::MaxSteps;
  return rec;
}

struct SpearmanResult {
  double rho = 0.0;
  double p_negative_trend = 1.0;  ///< one-sided p-value for rho < 0
};

/// Spearman rank correlation of y against its index, with tie-averaged
/// ranks; the p-value uses the t approximation.
inline SpearmanResult spearman_trend(const std::vector<double>& y) {
  const std::size_t n = y.size();
  SpearmanResult res;
  if (n < 3) return res;
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return y[a] != y[b] ? y[a] < y[b] : a < b;
  });
  std::vector<double> rank(n, 0.0);
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    while (j + 1 < n && y[order[j + 1]] == y[order[i]]) ++j;
    const double avg = 0.5 * (static_cast<double>(i) + static_cast<double>(j));
    for (std::size_t k = i; k <= j; ++k) rank[order[k]] = avg;
    i = j + 1;
  }
  const double mean = 0.5 * static_cast<double>(n - 1);
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    const double dx = static_cast<double>(k) - mean;
    const double dy = rank[k] - mean;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  if (syy <= 0.0) return res;  // constant series: no trend evidence
  res.rho = sxy / std::sqrt(sxx * syy);
  const double df = static_cast<double>(n - 2);
  const double denom = std::max(1e-300, 1.0 - res.rho * res.rho);
  const double t = res.rho * std::sqrt(df / denom);
  boost::math::students_t_distribution<double> dist(df);
  res.p_negative_trend = boost::math::cdf(dist, t);
  return res;
}

struct MipFractionParams {
  int n_rollouts = 50;
  int max_steps = 200;
  double convergence_eps = 0.01;
  int window = 100;
  std::uint64_t seed = 0;
};

struct BenchReport {
  std::string environment;
  nlohmann::json config;
  long total_steps = 0;
  long mip_invocations = 0;
  long sample_count = 0;
  std::vector<std::uint8_t> mip_flags;     ///< one flag per executed step
  std::vector<double> window_fractions;    ///< sliding window, stride 1
  double first_window = 0.0;
  double final_window = 0.0;
  double spearman_rho = 0.0;
  double spearman_p = 1.0;
  double lnms_seconds = 0.0;               ///< summed per-step solve time
};

inline nlohmann::json bench_report_to_json(const BenchReport& r,
                                           bool strip_timing = false) {
  return nlohmann::json{{"environment", r.environment},
                        {"config", r.config},
                        {"total_steps", r.total_steps},
                        {"mip_invocations", r.mip_invocations},
                        {"sample_count", r.sample_count},
                        {"first_window", r.first_window},
                        {"final_window", r.final_window},
                        {"spearman_rho", r.spearman_rho},
                        {"spearman_p", r.spearman_p},
                        {"lnms_seconds", strip_timing ? 0.0 : r.lnms_seconds}};
}

inline void write_fraction_curve_csv(const BenchReport& r, std::ostream& os) {
  os << "window_index,mip_fraction\n";
  char buf[64];
  for (std::size_t k = 0; k < r.window_fractions.size(); ++k) {
    std::snprintf(buf, sizeof(buf), "%zu,%.17g\n", k, r.window_fractions[k]);
    os << buf;
  }
}

/**
 * @brief The MIP-fraction decay experiment.
 *
 * Rolls the LNMS controller out from i.i.d. initial states with one shared
 * persistent store and reports the sliding-window fraction of steps that
 * needed branch and bound, plus its Spearman trend.
 */
inline BenchReport run_mip_fraction_experiment(const BenchProblem& problem,
                                               const MipFractionParams& params,
                                               const BnbConfig& config = {}) {
  if (params.n_rollouts < 0 || params.window < 1)
    throw InvalidParameter("run_mip_fraction_experiment: bad parameters");
  if (((problem.region_hi - problem.region_lo).array() < 0.0).any())
    throw InvalidRegion("run_mip_fraction_experiment: empty region");

  BenchReport rep;
  rep.environment = problem.environment;
  rep.config = {{"n_rollouts", params.n_rollouts},
                {"max_steps", params.max_steps},
                {"convergence_eps", params.convergence_eps},
                {"window", params.window},
                {"seed", params.seed}};

  LnmsController controller(problem.ocp, problem.nn_weights, config);
  Rng rng(params.seed);
  for (int r = 0; r < params.n_rollouts; ++r) {
    const Vec x0 = rng.uniform_vec(problem.region_lo, problem.region_hi);
    closed_loop_rollout(controller, x0, params.max_steps, params.convergence_eps);
  }
  const LnmsStats& stats = controller.stats();
  rep.total_steps = stats.steps;
  rep.mip_invocations = stats.mip_invocations;
  rep.sample_count = static_cast<long>(controller.store().size());
  rep.mip_flags.reserve(stats.records.size());
  for (const auto& r : stats.records) {
    rep.mip_flags.push_back(r.mip_invoked ? 1 : 0);
    rep.lnms_seconds += r.solve_time;
  }

  const int w = params.window;
  if (static_cast<int>(rep.mip_flags.size()) >= w) {
    long acc = 0;
    for (int k = 0; k < w; ++k) acc += rep.mip_flags[static_cast<std::size_t>(k)];
    rep.window_fractions.push_back(static_cast<double>(acc) / w);
    for (std::size_t k = static_cast<std::size_t>(w); k < rep.mip_flags.size(); ++k) {
      acc += rep.mip_flags[k] - rep.mip_flags[k - static_cast<std::size_t>(w)];
      rep.window_fractions.push_back(static_cast<double>(acc) / w);
    }
    rep.first_window = rep.window_fractions.front();
    rep.final_window = rep.window_fractions.back();
    const SpearmanResult sp = spearman_trend(rep.window_fractions);
    rep.spearman_rho = sp.rho;
    rep.spearman_p = sp.p_negative_trend;
  }
  return rep;
}

struct WallclockReport {
  std::string environment;
  int n_ocps = 0;
  double lnms_seconds = 0.0;
  double mip_seconds = 0.0;
  double speedup_ratio = 0.0;  ///< mip_seconds / lnms_seconds
  long lnms_mip_calls = 0;
  long infeasible_states = 0;
  std::uint64_t seed = 0;
};

inline nlohmann::json wallclock_report_to_json(const WallclockReport& r,
                                               bool strip_timing = false) {
  return nlohmann::json{{"environment", r.environment},
                        {"n_ocps", r.n_ocps},
                        {"lnms_seconds", strip_timing ? 0.0 : r.lnms_seconds},
                        {"mip_seconds", strip_timing ? 0.0 : r.mip_seconds},
                        {"speedup_ratio", strip_timing ? 0.0 : r.speedup_ratio},
                        {"lnms_mip_calls", r.lnms_mip_calls},
                        {"infeasible_states", r.infeasible_states},
                        {"seed", r.seed}};
}

/**
 * @brief Wall-clock comparison: LNMS with a persistent store versus cold
 * exact branch and bound, on one shared set of random initial states.
 */
inline WallclockReport run_wallclock_comparison(const BenchProblem& problem, int n_ocps,
                                                std::uint64_t seed,
                                                const BnbConfig& lnms_config = {},
                                                const BnbConfig& cold_config = {}) {
  WallclockReport rep;
  rep.environment = problem.environment;
  rep.n_ocps = n_ocps;
  rep.seed = seed;

  Rng rng(seed);
  std::vector<Vec> states;
  states.reserve(static_cast<std::size_t>(n_ocps));
  for (int i = 0; i < n_ocps; ++i)
    states.push_back(rng.uniform_vec(problem.region_lo, problem.region_hi));

  LnmsController controller(problem.ocp, problem.nn_weights, lnms_config);
  for (const Vec& x0 : states) {
    const auto t0 = std::chrono::steady_clock::now();
    try {
      controller.control_step(x0);
    } catch (const InfeasibleProblem&) {
      ++rep.infeasible_states;
    }
    rep.lnms_seconds +=
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  }
  rep.lnms_mip_calls = controller.stats().mip_invocations;

  for (const Vec& x0 : states) {
    const auto t0 = std::chrono::steady_clock::now();
    solve_bnb(problem.ocp, x0, std::nullopt, cold_config);
    rep.mip_seconds +=
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  }
  rep.speedup_ratio = rep.lnms_seconds > 0.0 ? rep.mip_seconds / rep.lnms_seconds : 0.0;
  return rep;
}

struct PartitionGrid {
  int resolution = 0;
  Vec lo, hi;
  std::vector<double> x1, x2;       ///< flattened row-major over (i, j)
  std::vector<long> region_id;      ///< first-seen ids of distinct sequences
  std::vector<double> u0;           ///< NaN where infeasible / not computed
  long distinct_regions = 0;
};

/**
 * @brief NN-partition export over a regular grid (planar systems only).
 *
 * Labels every grid point with an id of its nearest sample's mode
 * sequence (ids assigned in first-seen scan order) and, when an OCP is
 * supplied, with the fixed-mode-QP first input at that point.
 */
inline PartitionGrid export_partition_grid(const SampleStore& store, int resolution,
                                           const Vec& lo, const Vec& hi,
                                           const HybridOcp* ocp_for_u0 = nullptr,
                                           const QpConfig& qp_cfg = {}) {
  if (lo.size() != 2 || hi.size() != 2 || store.weights().size() != 2)
    throw UnsupportedDimension("export_partition_grid: planar state space required");
  if (store.empty())
    throw InvalidParameter("export_partition_grid: empty store");
  if (resolution < 2)
    throw InvalidParameter("export_partition_grid: resolution must be >= 2");

  PartitionGrid grid;
  grid.resolution = resolution;
  grid.lo = lo;
  grid.hi = hi;
  const auto coord = [&](int k, int axis) {
    return lo[axis] + (hi[axis] - lo[axis]) * static_cast<double>(k) /
                          static_cast<double>(resolution - 1);
  };

  std::map<std::vector<int>, long> ids;
  for (int i = 0; i < resolution; ++i) {
    for (int j = 0; j < resolution; ++j) {
      Vec x(2);
      x << coord(i, 0), coord(j, 1);
      const auto nn = store.nn_query(x);
      auto [it, inserted] =
          ids.try_emplace(nn->modes.entries, static_cast<long>(ids.size()));
      grid.x1.push_back(x[0]);
      grid.x2.push_back(x[1]);
      grid.region_id.push_back(it->second);
      double u0 = std::numeric_limits<double>::quiet_NaN();
      if (ocp_for_u0) {
        const DenseQp qp = assemble_fixed_mode_ocp(*ocp_for_u0, nn->modes, x);
        const QpSolution s = solve_qp(qp, qp_cfg);
        if (s.status == QpStatus::Optimal) u0 = s.z[0];
      }
      grid.u0.push_back(u0);
    }
  }
  grid.distinct_regions = static_cast<long>(ids.size());
  return grid;
}

inline void write_partition_csv(const PartitionGrid& grid, std::ostream& os) {
  os << "x1,x2,region_id,u0\n";
  char buf[160];
  for (std::size_t k = 0; k < grid.region_id.size(); ++k) {
    std::snprintf(buf, sizeof(buf), "%.17g,%.17g,%ld,%.17g\n", grid.x1[k], grid.x2[k],
                  grid.region_id[k], grid.u0[k]);
    os << buf;
  }
}

struct AgreementReport {
  double max_state_deviation = 0.0;
  int trajectories = 0;
  long store_size = 0;
  long improvement_changed = 0;
};

/**
 * @brief Closed-loop agreement experiment between LNMS and exact MPC.
 *
 * Builds a store from exact-MPC rollouts at the shared initial states,
 * runs the full-optimality improvement pass over it, then replays the same
 * initial states through the LNMS controller and reports the largest
 * per-step state deviation from the exact trajectories.
 */
inline AgreementReport lnms_exact_agreement(const BenchProblem& problem, int n_states,
                                            int max_steps, double convergence_eps,
                                            std::uint64_t seed,
                                            const BnbConfig& config = {}) {
  AgreementReport rep;
  rep.trajectories = n_states;
  SampleStore store(problem.nn_weights);
  Rng rng(seed);
  std::vector<Vec> starts;
  std::vector<RolloutRecord> exact;
  for (int i = 0; i < n_states; ++i) {
    starts.push_back(rng.uniform_vec(problem.region_lo, problem.region_hi));
    exact.push_back(exact_mpc_rollout(problem.ocp, starts.back(), max_steps,
                                      convergence_eps, config, &store));
  }

  const ImprovementReport improved =
      improve_samples(store, problem.ocp, std::nullopt, nullptr, config);
  rep.improvement_changed = improved.changed_count;
  rep.store_size = static_cast<long>(store.size());

  LnmsController controller(problem.ocp, std::move(store), config);
  for (int i = 0; i < n_states; ++i) {
    const RolloutRecord replay =
        closed_loop_rollout(controller, starts[static_cast<std::size_t>(i)], max_steps,
                            convergence_eps);
    const RolloutRecord& ref = exact[static_cast<std::size_t>(i)];
    const std::size_t steps = std::min(replay.steps.size(), ref.steps.size());
    for (std::size_t t = 0; t < steps; ++t)
      rep.max_state_deviation =
          std::max(rep.max_state_deviation,
                   (replay.steps[t].x - ref.steps[t].x).cwiseAbs().maxCoeff());
    rep.max_state_deviation =
        std::max(rep.max_state_deviation,
                 (replay.final_x - ref.final_x).cwiseAbs().maxCoeff());
    if (replay.steps.size() != ref.steps.size())
      rep.max_state_deviation = std::numeric_limits<double>::infinity();
  }
  return rep;
}

}  // namespace lnms
