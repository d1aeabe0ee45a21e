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

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <queue>
#include <utility>
#include <vector>

#include "lnms/errors.hpp"
#include "lnms/hybrid_ocp.hpp"
#include "lnms/mode_sequence.hpp"
#include "lnms/qp.hpp"
#include "lnms/types.hpp"

namespace lnms {

enum class MiqpStatus { Optimal, FeasibleEarlyStop, Infeasible, TimeLimit };

inline const char* to_string(MiqpStatus s) {
  switch (s) {
    case MiqpStatus::Optimal: return "Optimal";
    case MiqpStatus::FeasibleEarlyStop: return "FeasibleEarlyStop";
    case MiqpStatus::Infeasible: return "Infeasible";
    case MiqpStatus::TimeLimit: return "TimeLimit";
  }
  return "?";
}

struct MiqpSolution {
  ModeSequence modes;
  Mat u;                     ///< inputs, one column per step (n_u by N)
  Mat x;                     ///< states incl. x_0, one column per step (n_x by N+1)
  double objective = std::numeric_limits<double>::quiet_NaN();
  double gap = std::numeric_limits<double>::infinity();
  MiqpStatus status = MiqpStatus::Infeasible;
  long nodes_explored = 0;   ///< relaxations (or enumerated sequences) solved
  double solve_time = 0.0;
  bool warm_started = false;
  bool warm_start_feasible = false;

  bool feasible_found() const {
    return status == MiqpStatus::Optimal || status == MiqpStatus::FeasibleEarlyStop ||
           (status == MiqpStatus::TimeLimit && modes.size() > 0);
  }
};

struct BnbConfig {
  std::optional<double> time_limit;  ///< wall-clock budget in seconds
  double gap_tol = 1e-6;             ///< relative gap target
  bool stop_at_first_feasible = false;
  std::optional<long> node_limit;
  QpConfig qp;
  /// When set, records (parent bound, child bound) pairs for every
  /// evaluated child node; used by the bound-monotonicity tests.
  std::vector<std::pair<double, double>>* bound_trace = nullptr;

  void validate() const {
    if (time_limit && *time_limit < 0.0)
      throw InvalidParameter("BnbConfig: negative time limit");
    if (node_limit && *node_limit < 0)
      throw InvalidParameter("BnbConfig: negative node limit");
    if (gap_tol < 0.0) throw InvalidParameter("BnbConfig: negative gap tolerance");
  }
};

/// JSON record of the solve statistics (external reporting format).
inline nlohmann::json solve_stats_json(const MiqpSolution& s) {
  return nlohmann::json{{"status", to_string(s.status)},
                        {"objective", s.objective},
                        {"gap", s.gap},
                        {"nodes", s.nodes_explored},
                        {"time_s", s.solve_time},
                        {"warm_started", s.warm_started},
                        {"warm_start_feasible", s.warm_start_feasible}};
}

namespace detail {

constexpr double kIntTol = 1e-6;  // binaries counted integral within this

/// Partial assignment of the mode binaries. -1 free, 0 excluded, 1 forced.
struct BnbNode {
  std::vector<std::int8_t> fix;  // N * n_M entries
  std::vector<int> resolved;     // per step: mode forced to 1, else -1
  double bound = -std::numeric_limits<double>::infinity();
  int depth = 0;
  std::uint64_t order = 0;       // creation index, deterministic tie-break
  /// Relaxation values of the free binaries, aligned with the (t, i) pairs
  /// of build_node_relaxation; empty when the relaxation did not converge.
  std::vector<double> mu_relax;
};

struct NodeWorseThan {
  bool operator()(const BnbNode& a, const BnbNode& b) const {
    if (a.bound != b.bound) return a.bound > b.bound;
    if (a.depth != b.depth) return a.depth < b.depth;  // deeper first
    return a.order > b.order;
  }
};

/// Applies fix(t, i) = v with unit propagation of the one-hot rows.
/// Returns false if the assignment empties a step.
inline bool apply_fix(BnbNode& node, int n_m, int t, int i, std::int8_t v) {
  auto at = [&](int tt, int ii) -> std::int8_t& {
    return node.fix[static_cast<std::size_t>(tt) * static_cast<std::size_t>(n_m) +
                    static_cast<std::size_t>(ii)];
  };
  if (at(t, i) == v) return true;
  if (at(t, i) != -1) return false;  // conflicting assignment
  at(t, i) = v;
  if (v == 1) {
    node.resolved[static_cast<std::size_t>(t)] = i;
    for (int j = 0; j < n_m; ++j)
      if (j != i && !apply_fix(node, n_m, t, j, 0)) return false;
    return true;
  }
  // v == 0: if exactly one candidate remains, it must take the step
  int last_free = -1, n_free = 0;
  bool has_one = false;
  for (int j = 0; j < n_m; ++j) {
    if (at(t, j) == -1) {
      ++n_free;
      last_free = j;
    } else if (at(t, j) == 1) {
      has_one = true;
    }
  }
  if (has_one) return true;
  if (n_free == 0) return false;
  if (n_free == 1) return apply_fix(node, n_m, t, last_free, 1);
  return true;
}

/// Relaxation of a node: free binaries live in [0, 1], excluded modes drop
/// their rows (valid because big_M dominates every residual on the box),
/// forced modes contribute hard dynamics/guard rows.
struct NodeRelaxation {
  DenseQp qp;
  std::vector<std::pair<int, int>> mu_vars;  // (t, mode) per relaxed binary
};

inline NodeRelaxation build_node_relaxation(const HybridOcp& ocp, const Vec& x_p,
                                            const BnbNode& node) {
  const PwaSystem& sys = ocp.system;
  const Index n_x = sys.n_x;
  const Index n_u = sys.n_u;
  const int N = ocp.N;
  const int n_m = static_cast<int>(sys.num_modes());
  const double M = ocp.big_M;

  NodeRelaxation rel;
  const auto binding = detail::binding_guard_rows(sys);
  auto fixed_at = [&](int t, int i) {
    return node.fix[static_cast<std::size_t>(t) * static_cast<std::size_t>(n_m) +
                    static_cast<std::size_t>(i)];
  };
  std::vector<Index> mu_col(static_cast<std::size_t>(N) * static_cast<std::size_t>(n_m),
                            -1);
  const Index n_base = static_cast<Index>(N) * (n_u + n_x);
  Index n = n_base;
  for (int t = 0; t < N; ++t)
    for (int i = 0; i < n_m; ++i)
      if (fixed_at(t, i) == -1) {
        mu_col[static_cast<std::size_t>(t) * static_cast<std::size_t>(n_m) +
               static_cast<std::size_t>(i)] = n++;
        rel.mu_vars.emplace_back(t, i);
      }

  const auto u_off = [&](int t) { return static_cast<Index>(t) * n_u; };
  const auto x_off = [&](int t) {
    return static_cast<Index>(N) * n_u + static_cast<Index>(t - 1) * n_x;
  };

  DenseQp& qp = rel.qp;
  qp.H = Mat::Zero(n, n);
  qp.g = Vec::Zero(n);
  qp.c0 = x_p.dot(ocp.Q * x_p);
  for (int t = 0; t < N; ++t) qp.H.block(u_off(t), u_off(t), n_u, n_u) = 2.0 * ocp.R;
  for (int t = 1; t < N; ++t) qp.H.block(x_off(t), x_off(t), n_x, n_x) = 2.0 * ocp.Q;
  qp.H.block(x_off(N), x_off(N), n_x, n_x) = 2.0 * ocp.P_term;

  const auto binding_count = [&](int mode) {
    Index c = 0;
    for (bool b : binding[static_cast<std::size_t>(mode)]) c += b ? 1 : 0;
    return c;
  };

  // count rows
  Index n_eq = 0, n_in = 0;
  for (int t = 0; t < N; ++t) {
    const int forced = node.resolved[static_cast<std::size_t>(t)];
    if (forced >= 0) {
      n_eq += n_x;
      n_in += binding_count(forced);
    } else {
      n_eq += 1;  // one-hot row
      for (int i = 0; i < n_m; ++i)
        if (fixed_at(t, i) == -1)
          n_in += 2 * n_x + binding_count(i) + 2;  // big-M rows + mu box
    }
  }
  n_in += 2 * static_cast<Index>(N) * (n_x + n_u);
  if (ocp.terminal_set) n_in += ocp.terminal_set->num_rows();

  qp.A_eq = Mat::Zero(n_eq, n);
  qp.b_eq = Vec::Zero(n_eq);
  qp.A_in = Mat::Zero(n_in, n);
  qp.b_in = Vec::Zero(n_in);

  Index er = 0, ir = 0;
  for (int t = 0; t < N; ++t) {
    const int forced = node.resolved[static_cast<std::size_t>(t)];
    if (forced >= 0) {
      const PwaMode& m = sys.modes[static_cast<std::size_t>(forced)];
      qp.A_eq.block(er, x_off(t + 1), n_x, n_x) = Mat::Identity(n_x, n_x);
      qp.A_eq.block(er, u_off(t), n_x, n_u) = -m.B;
      qp.b_eq.segment(er, n_x) = m.c;
      if (t == 0)
        qp.b_eq.segment(er, n_x) += m.A * x_p;
      else
        qp.A_eq.block(er, x_off(t), n_x, n_x) = -m.A;
      er += n_x;
      for (Index r = 0; r < m.num_guard_rows(); ++r) {
        if (!binding[static_cast<std::size_t>(forced)][static_cast<std::size_t>(r)])
          continue;
        qp.A_in.block(ir, u_off(t), 1, n_u) = m.guard_J.row(r);
        qp.b_in[ir] = m.guard_k[r] + kGuardTol;
        if (t == 0)
          qp.b_in[ir] -= m.guard_H.row(r).dot(x_p);
        else
          qp.A_in.block(ir, x_off(t), 1, n_x) = m.guard_H.row(r);
        ++ir;
      }
      continue;
    }
    // one-hot equality over the free binaries of this step
    for (int i = 0; i < n_m; ++i) {
      const Index col = mu_col[static_cast<std::size_t>(t) * static_cast<std::size_t>(n_m) +
                               static_cast<std::size_t>(i)];
      if (col >= 0) qp.A_eq(er, col) = 1.0;
    }
    qp.b_eq[er] = 1.0;
    ++er;
    for (int i = 0; i < n_m; ++i) {
      if (fixed_at(t, i) != -1) continue;
      const Index col = mu_col[static_cast<std::size_t>(t) * static_cast<std::size_t>(n_m) +
                               static_cast<std::size_t>(i)];
      const PwaMode& m = sys.modes[static_cast<std::size_t>(i)];
      // |x_{t+1} - A x_t - B u_t - c| <= (1 - mu) M, split into two rows
      for (Index j = 0; j < n_x; ++j) {
        qp.A_in(ir, x_off(t + 1) + j) = 1.0;
        qp.A_in.block(ir, u_off(t), 1, n_u) = -m.B.row(j);
        qp.A_in(ir, col) = M;
        qp.b_in[ir] = M + m.c[j];
        if (t == 0)
          qp.b_in[ir] += m.A.row(j).dot(x_p);
        else
          qp.A_in.block(ir, x_off(t), 1, n_x) = -m.A.row(j);
        ++ir;
        qp.A_in(ir, x_off(t + 1) + j) = -1.0;
        qp.A_in.block(ir, u_off(t), 1, n_u) = m.B.row(j);
        qp.A_in(ir, col) = M;
        qp.b_in[ir] = M - m.c[j];
        if (t == 0)
          qp.b_in[ir] -= m.A.row(j).dot(x_p);
        else
          qp.A_in.block(ir, x_off(t), 1, n_x) = m.A.row(j);
        ++ir;
      }
      for (Index r = 0; r < m.num_guard_rows(); ++r) {
        if (!binding[static_cast<std::size_t>(i)][static_cast<std::size_t>(r)]) continue;
        qp.A_in.block(ir, u_off(t), 1, n_u) = m.guard_J.row(r);
        qp.A_in(ir, col) = M;
        qp.b_in[ir] = m.guard_k[r] + kGuardTol + M;
        if (t == 0)
          qp.b_in[ir] -= m.guard_H.row(r).dot(x_p);
        else
          qp.A_in.block(ir, x_off(t), 1, n_x) = m.guard_H.row(r);
        ++ir;
      }
      qp.A_in(ir, col) = 1.0;
      qp.b_in[ir] = 1.0;
      ++ir;
      qp.A_in(ir, col) = -1.0;
      qp.b_in[ir] = 0.0;
      ++ir;
    }
  }
  for (int t = 1; t <= N; ++t) {
    qp.A_in.block(ir, x_off(t), n_x, n_x) = Mat::Identity(n_x, n_x);
    qp.b_in.segment(ir, n_x) = sys.x_max;
    ir += n_x;
    qp.A_in.block(ir, x_off(t), n_x, n_x) = -Mat::Identity(n_x, n_x);
    qp.b_in.segment(ir, n_x) = -sys.x_min;
    ir += n_x;
  }
  for (int t = 0; t < N; ++t) {
    qp.A_in.block(ir, u_off(t), n_u, n_u) = Mat::Identity(n_u, n_u);
    qp.b_in.segment(ir, n_u) = sys.u_max;
    ir += n_u;
    qp.A_in.block(ir, u_off(t), n_u, n_u) = -Mat::Identity(n_u, n_u);
    qp.b_in.segment(ir, n_u) = -sys.u_min;
    ir += n_u;
  }
  if (ocp.terminal_set && ocp.terminal_set->num_rows() > 0) {
    const Index nt = ocp.terminal_set->num_rows();
    qp.A_in.block(ir, x_off(N), nt, n_x) = ocp.terminal_set->F;
    qp.b_in.segment(ir, nt) = ocp.terminal_set->g;
    ir += nt;
  }
  return rel;
}

/// Rounds a relaxation solution to a mode sequence when all binaries are
/// integral within kIntTol; returns nullopt otherwise.
inline std::optional<ModeSequence> integral_modes(const HybridOcp& ocp,
                                                  const NodeRelaxation& rel,
                                                  const BnbNode& node, const Vec& z) {
  const int N = ocp.N;
  const int n_m = static_cast<int>(ocp.system.num_modes());
  std::vector<double> mu(static_cast<std::size_t>(N) * static_cast<std::size_t>(n_m),
                         0.0);
  const Index n_base = static_cast<Index>(N) * (ocp.system.n_u + ocp.system.n_x);
  for (std::size_t k = 0; k < rel.mu_vars.size(); ++k) {
    const double v = z[n_base + static_cast<Index>(k)];
    if (std::min(v, 1.0 - v) > kIntTol) return std::nullopt;
    mu[static_cast<std::size_t>(rel.mu_vars[k].first) * static_cast<std::size_t>(n_m) +
       static_cast<std::size_t>(rel.mu_vars[k].second)] = v;
  }
  ModeSequence seq;
  seq.entries.resize(static_cast<std::size_t>(N));
  for (int t = 0; t < N; ++t) {
    int best = node.resolved[static_cast<std::size_t>(t)];
    if (best < 0) {
      double best_v = -1.0;
      for (int i = 0; i < n_m; ++i) {
        const double v = mu[static_cast<std::size_t>(t) * static_cast<std::size_t>(n_m) +
                            static_cast<std::size_t>(i)];
        if (v > best_v) {
          best_v = v;
          best = i;
        }
      }
    }
    seq.entries[static_cast<std::size_t>(t)] = best;
  }
  return seq;
}

/// The (t, i) pairs of the free binaries of a node, in the assembly order
/// used by build_node_relaxation.
inline std::vector<std::pair<int, int>> free_binaries(const BnbNode& node, int horizon,
                                                      int n_m) {
  std::vector<std::pair<int, int>> vars;
  for (int t = 0; t < horizon; ++t)
    for (int i = 0; i < n_m; ++i)
      if (node.fix[static_cast<std::size_t>(t) * static_cast<std::size_t>(n_m) +
                   static_cast<std::size_t>(i)] == -1)
        vars.emplace_back(t, i);
  return vars;
}

/// Picks (t, i) of the most fractional binary at the earliest fractional
/// step; returns nullopt when every binary is integral (or no values exist).
inline std::optional<std::pair<int, int>> branch_variable(
    const std::vector<std::pair<int, int>>& mu_vars, const std::vector<double>& mu) {
  int best_t = -1, best_i = -1;
  double best_frac = kIntTol;
  for (std::size_t k = 0; k < mu_vars.size() && k < mu.size(); ++k) {
    const auto [t, i] = mu_vars[k];
    const double frac = std::min(mu[k], 1.0 - mu[k]);
    if (frac <= kIntTol) continue;
    if (best_t == -1 || t < best_t || (t == best_t && frac > best_frac)) {
      best_t = t;
      best_i = i;
      best_frac = frac;
    }
  }
  if (best_t < 0) return std::nullopt;
  return std::make_pair(best_t, best_i);
}

}  // namespace detail

/**
 * @brief Exact hybrid OCP solution by best-first branch and bound.
 *
 * Nodes relax the unfixed binaries to [0, 1]; branching picks the most
 * fractional binary at the earliest step. A feasible warm-start sequence
 * seeds the incumbent before any node is explored; with
 * stop_at_first_feasible the solve returns as soon as an incumbent exists.
 * Incumbent trajectories always come from the fixed-mode QP of the rounded
 * sequence, so objective values are exchangeable with enumerate_exhaustive.
 */
inline MiqpSolution solve_bnb(const HybridOcp& ocp, const Vec& x_p,
                              const std::optional<ModeSequence>& warm_start = std::nullopt,
                              const BnbConfig& config = {}) {
  const auto t_start = std::chrono::steady_clock::now();
  ocp.validate();
  config.validate();
  const int n_m = static_cast<int>(ocp.system.num_modes());

  MiqpSolution out;
  auto elapsed = [&] {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start)
        .count();
  };
  auto finish = [&](MiqpStatus status) {
    out.status = status;
    out.solve_time = elapsed();
    return out;
  };

  if (!ocp.system.in_state_bounds(x_p)) return finish(MiqpStatus::Infeasible);

  bool have_incumbent = false;
  double inc_obj = std::numeric_limits<double>::infinity();
  ModeSequence inc_modes;
  QpSolution inc_sol;

  auto try_incumbent = [&](const ModeSequence& seq) {
    const DenseQp qp = assemble_fixed_mode_ocp(ocp, seq, x_p);
    QpSolution s = solve_qp(qp, config.qp);
    if (s.status != QpStatus::Optimal) return false;
    if (!have_incumbent || s.objective < inc_obj - 1e-12) {
      have_incumbent = true;
      inc_obj = s.objective;
      inc_modes = seq;
      inc_sol = std::move(s);
    }
    return true;
  };

  if (warm_start) {
    detail::check_mode_sequence(ocp, *warm_start);
    out.warm_started = true;
    const DenseQp warm_qp = assemble_fixed_mode_ocp(ocp, *warm_start, x_p);
    if (check_feasibility(warm_qp).feasible) {
      out.warm_start_feasible = try_incumbent(*warm_start);
      if (out.warm_start_feasible && config.stop_at_first_feasible) {
        out.modes = inc_modes;
        unpack_trajectories(ocp, inc_sol.z, x_p, out.u, out.x);
        out.objective = inc_obj;
        out.gap = std::numeric_limits<double>::infinity();
        return finish(MiqpStatus::FeasibleEarlyStop);
      }
    }
  }

  auto prune_margin = [&] {
    return config.gap_tol * std::max(1.0, std::abs(inc_obj));
  };

  std::priority_queue<detail::BnbNode, std::vector<detail::BnbNode>,
                      detail::NodeWorseThan>
      queue;
  std::uint64_t order = 0;
  std::optional<MiqpStatus> limit_hit;

  // Evaluates a node's relaxation once at creation, updates the incumbent
  // on integral solutions, and queues the node when it needs branching.
  auto evaluate_and_push = [&](detail::BnbNode&& node, double parent_bound) {
    if (config.time_limit && elapsed() > *config.time_limit) {
      limit_hit = MiqpStatus::TimeLimit;
      return;
    }
    if (config.node_limit && out.nodes_explored >= *config.node_limit) {
      limit_hit = MiqpStatus::TimeLimit;
      return;
    }
    ++out.nodes_explored;
    bool fully_resolved = true;
    for (int r : node.resolved) fully_resolved &= (r >= 0);
    if (fully_resolved) {
      ModeSequence seq;
      seq.entries.assign(node.resolved.begin(), node.resolved.end());
      const DenseQp qp = assemble_fixed_mode_ocp(ocp, seq, x_p);
      const QpSolution s = solve_qp(qp, config.qp);
      if (s.status != QpStatus::Optimal) return;
      if (config.bound_trace)
        config.bound_trace->emplace_back(parent_bound, s.objective);
      try_incumbent(seq);
      return;
    }
    detail::NodeRelaxation rel = detail::build_node_relaxation(ocp, x_p, node);
    const QpSolution s = solve_qp(rel.qp, config.qp);
    if (s.status == QpStatus::Infeasible) return;
    double bound = parent_bound;
    node.mu_relax.clear();
    if (s.status == QpStatus::Optimal) {
      bound = s.objective;
      if (config.bound_trace) config.bound_trace->emplace_back(parent_bound, bound);
      if (auto seq = detail::integral_modes(ocp, rel, node, s.z)) {
        if (try_incumbent(*seq)) return;  // relaxation solved the subtree
      }
      const Index n_base =
          static_cast<Index>(ocp.N) * (ocp.system.n_u + ocp.system.n_x);
      node.mu_relax.resize(rel.mu_vars.size());
      for (std::size_t k = 0; k < rel.mu_vars.size(); ++k)
        node.mu_relax[k] = s.z[n_base + static_cast<Index>(k)];
      // rounding heuristic: the per-step argmax sequence often yields a
      // usable incumbent long before the tree reaches a leaf (root always;
      // deeper nodes only until some incumbent exists, which keeps warm
      // starts dominant)
      if (node.depth == 0 || !have_incumbent) {
        ModeSequence rounded;
        rounded.entries.assign(node.resolved.begin(), node.resolved.end());
        std::vector<double> best_mu(static_cast<std::size_t>(ocp.N), -1.0);
        for (std::size_t k = 0; k < rel.mu_vars.size(); ++k) {
          const auto [t, i] = rel.mu_vars[k];
          if (node.resolved[static_cast<std::size_t>(t)] >= 0) continue;
          if (node.mu_relax[k] > best_mu[static_cast<std::size_t>(t)]) {
            best_mu[static_cast<std::size_t>(t)] = node.mu_relax[k];
            rounded.entries[static_cast<std::size_t>(t)] = i;
          }
        }
        try_incumbent(rounded);
      }
    }
    if (have_incumbent && bound >= inc_obj - prune_margin()) return;
    node.bound = std::isfinite(bound) ? bound
                                      : -std::numeric_limits<double>::max();
    node.order = order++;
    queue.push(std::move(node));
  };

  detail::BnbNode root;
  root.fix.assign(static_cast<std::size_t>(ocp.N) * static_cast<std::size_t>(n_m), -1);
  root.resolved.assign(static_cast<std::size_t>(ocp.N), -1);
  root.depth = 0;
  evaluate_and_push(std::move(root), -std::numeric_limits<double>::infinity());

  double final_lb = std::numeric_limits<double>::infinity();
  bool tree_closed = queue.empty();

  while (!queue.empty() && !limit_hit) {
    if (config.stop_at_first_feasible && have_incumbent) break;
    if (config.time_limit && elapsed() > *config.time_limit) {
      limit_hit = MiqpStatus::TimeLimit;
      break;
    }
    detail::BnbNode node = queue.top();
    queue.pop();
    final_lb = node.bound;
    if (have_incumbent && node.bound >= inc_obj - prune_margin()) {
      // best-first order: every remaining node is at least as bad
      tree_closed = true;
      break;
    }

    auto mu_vars = detail::free_binaries(node, ocp.N, n_m);
    std::optional<std::pair<int, int>> branch =
        detail::branch_variable(mu_vars, node.mu_relax);
    if (!branch && !mu_vars.empty()) branch = mu_vars.front();
    if (!branch) continue;
    for (std::int8_t v : {std::int8_t{1}, std::int8_t{0}}) {
      detail::BnbNode child = node;
      child.depth = node.depth + 1;
      child.mu_relax.clear();
      if (!detail::apply_fix(child, n_m, branch->first, branch->second, v)) continue;
      evaluate_and_push(std::move(child), node.bound);
      if (limit_hit) break;
    }
    if (queue.empty() && !limit_hit) tree_closed = true;
    if (config.stop_at_first_feasible && have_incumbent) break;
  }

  if (!have_incumbent) {
    if (limit_hit) return finish(MiqpStatus::TimeLimit);
    return finish(MiqpStatus::Infeasible);
  }

  out.modes = inc_modes;
  unpack_trajectories(ocp, inc_sol.z, x_p, out.u, out.x);
  out.objective = inc_obj;
  double lb = tree_closed && queue.empty() ? inc_obj : final_lb;
  if (!queue.empty()) lb = std::min(queue.top().bound, lb);
  if (limit_hit && out.nodes_explored == 0)
    lb = -std::numeric_limits<double>::infinity();
  out.gap = std::max(0.0, inc_obj - lb) / std::max(1.0, std::abs(inc_obj));

  if (limit_hit) return finish(*limit_hit);
  if (config.stop_at_first_feasible) return finish(MiqpStatus::FeasibleEarlyStop);
  return finish(MiqpStatus::Optimal);
}

/**
 * @brief Testing oracle: solves every fixed-mode QP of the n_M^N sequences.
 *
 * Refuses problems past one million sequences. nodes_explored reports the
 * number of sequences evaluated.
 */
inline MiqpSolution enumerate_exhaustive(const HybridOcp& ocp, const Vec& x_p,
                                         const QpConfig& qp_cfg = {}) {
  const auto t_start = std::chrono::steady_clock::now();
  ocp.validate();
  const int n_m = static_cast<int>(ocp.system.num_modes());
  double count = std::pow(static_cast<double>(n_m), ocp.N);
  if (count > 1e6)
    throw TooManySequences("enumerate_exhaustive: n_M^N exceeds 1e6");

  MiqpSolution out;
  auto finish = [&](MiqpStatus status) {
    out.status = status;
    out.solve_time = std::chrono::duration<double>(
                         std::chrono::steady_clock::now() - t_start)
                         .count();
    return out;
  };
  if (!ocp.system.in_state_bounds(x_p)) return finish(MiqpStatus::Infeasible);

  bool have_best = false;
  double best_obj = std::numeric_limits<double>::infinity();
  ModeSequence best_modes;
  QpSolution best_sol;

  ModeSequence seq = ModeSequence::constant(static_cast<std::size_t>(ocp.N), 0);
  while (true) {
    ++out.nodes_explored;
    const DenseQp qp = assemble_fixed_mode_ocp(ocp, seq, x_p);
    QpSolution s = solve_qp(qp, qp_cfg);
    if (s.status == QpStatus::Optimal &&
        (!have_best || s.objective < best_obj - 1e-12)) {
      have_best = true;
      best_obj = s.objective;
      best_modes = seq;
      best_sol = std::move(s);
    }
    // odometer increment, last step fastest
    int t = ocp.N - 1;
    while (t >= 0) {
      if (++seq.entries[static_cast<std::size_t>(t)] < n_m) break;
      seq.entries[static_cast<std::size_t>(t)] = 0;
      --t;
    }
    if (t < 0) break;
  }

  if (!have_best) return finish(MiqpStatus::Infeasible);
  out.modes = best_modes;
  unpack_trajectories(ocp, best_sol.z, x_p, out.u, out.x);
  out.objective = best_obj;
  out.gap = 0.0;
  return finish(MiqpStatus::Optimal);
}

}  // namespace lnms
