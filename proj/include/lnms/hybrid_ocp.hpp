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

#include <algorithm>
#include <cmath>
#include <optional>

#include "lnms/errors.hpp"
#include "lnms/mode_sequence.hpp"
#include "lnms/polytope.hpp"
#include "lnms/pwa_system.hpp"
#include "lnms/qp.hpp"
#include "lnms/types.hpp"

namespace lnms {

/**
 * @brief Hybrid optimal control problem over a PWA system.
 *
 * Quadratic stage cost x'Qx + u'Ru over N steps plus terminal cost
 * x_N' P_term x_N; mode-conditional constraints enter the mixed-integer
 * form through the big-M constant. The optional terminal set adds hard
 * rows on x_N.
 */
struct HybridOcp {
  PwaSystem system;
  int N = 0;
  Mat Q;
  Mat R;
  Mat P_term;
  double big_M = 0.0;
  std::optional<Polytope> terminal_set;

  void validate() const {
    system.validate();
    if (N < 1) throw InvalidParameter("HybridOcp: horizon must be at least 1");
    if (Q.rows() != system.n_x || Q.cols() != system.n_x ||
        P_term.rows() != system.n_x || P_term.cols() != system.n_x ||
        R.rows() != system.n_u || R.cols() != system.n_u)
      throw DimensionMismatch("HybridOcp: cost matrix dimensions");
    if (big_M <= 0.0) throw InvalidParameter("HybridOcp: big_M must be positive");
    if (terminal_set) {
      if (terminal_set->dim() != system.n_x)
        throw DimensionMismatch("HybridOcp: terminal set dimension");
      if (terminal_set->num_rows() > 0 && terminal_set->g.minCoeff() < -1e-12)
        throw InvalidParameter("HybridOcp: terminal set must contain the origin");
    }
  }

  Index num_decision_vars() const {
    return static_cast<Index>(N) * (system.n_u + system.n_x);
  }
};

/// Largest value a linear form coef'v + offset attains over the box [lo, hi].
inline double box_sup(const Vec& coef, const Vec& lo, const Vec& hi, double offset) {
  double s = offset;
  for (Index i = 0; i < coef.size(); ++i)
    s += coef[i] >= 0.0 ? coef[i] * hi[i] : coef[i] * lo[i];
  return s;
}

/**
 * @brief Valid big-M constant from interval arithmetic on the bound box.
 *
 * Returns 1.1 times the largest dynamics residual |x+ - A x - B u - c| or
 * guard violation attainable while (x, u, x+) stay inside the global
 * bounds, so deactivated mode constraints can never cut feasible points.
 */
inline double compute_big_m(const HybridOcp& ocp) {
  const PwaSystem& sys = ocp.system;
  if (!sys.x_min.allFinite() || !sys.x_max.allFinite() || !sys.u_min.allFinite() ||
      !sys.u_max.allFinite())
    throw UnboundedBox("compute_big_m: state/input bounds must be finite");

  const Index n_x = sys.n_x;
  const Index n_u = sys.n_u;
  Vec lo(n_x + n_u + n_x), hi(n_x + n_u + n_x);  // (x, u, x+)
  lo << sys.x_min, sys.u_min, sys.x_min;
  hi << sys.x_max, sys.u_max, sys.x_max;

  double worst = 0.0;
  for (const PwaMode& m : sys.modes) {
    for (Index j = 0; j < n_x; ++j) {
      Vec coef = Vec::Zero(lo.size());
      coef.head(n_x) = -m.A.row(j).transpose();
      coef.segment(n_x, n_u) = -m.B.row(j).transpose();
      coef[n_x + n_u + j] = 1.0;
      worst = std::max(worst, box_sup(coef, lo, hi, -m.c[j]));
      worst = std::max(worst, box_sup(-coef, lo, hi, m.c[j]));
    }
    for (Index r = 0; r < m.num_guard_rows(); ++r) {
      Vec coef = Vec::Zero(lo.size());
      coef.head(n_x) = m.guard_H.row(r).transpose();
      coef.segment(n_x, n_u) = m.guard_J.row(r).transpose();
      worst = std::max(worst, box_sup(coef, lo, hi, -m.guard_k[r]));
    }
  }
  return 1.1 * worst;
}

/// Builds a HybridOcp and fills big_M from compute_big_m unless overridden.
inline HybridOcp make_hybrid_ocp(PwaSystem system, int N, Mat Q, Mat R, Mat P_term,
                                 std::optional<Polytope> terminal_set = std::nullopt,
                                 std::optional<double> big_m_override = std::nullopt) {
  HybridOcp ocp;
  ocp.system = std::move(system);
  ocp.N = N;
  ocp.Q = std::move(Q);
  ocp.R = std::move(R);
  ocp.P_term = std::move(P_term);
  ocp.terminal_set = std::move(terminal_set);
  ocp.big_M = 1.0;  // placeholder for validation of everything else
  ocp.validate();
  ocp.big_M = big_m_override ? *big_m_override : compute_big_m(ocp);
  ocp.validate();
  return ocp;
}

namespace detail {

inline void check_mode_sequence(const HybridOcp& ocp, const ModeSequence& modes) {
  if (modes.size() != static_cast<std::size_t>(ocp.N))
    throw InvalidModeSequence("mode sequence length does not match horizon");
  for (int m : modes.entries)
    if (m < 0 || m >= static_cast<int>(ocp.system.num_modes()))
      throw InvalidModeSequence("mode index out of range");
}

/// Guard rows that cannot be violated anywhere on the global state/input
/// box are redundant in every program that already carries the box rows
/// (the bundled environments fold the box into their guards). One flag
/// vector per mode, true = row is worth assembling.
inline std::vector<std::vector<bool>> binding_guard_rows(const PwaSystem& sys) {
  std::vector<std::vector<bool>> out(sys.num_modes());
  Vec lo(sys.n_x + sys.n_u), hi(sys.n_x + sys.n_u);
  lo << sys.x_min, sys.u_min;
  hi << sys.x_max, sys.u_max;
  for (std::size_t i = 0; i < sys.num_modes(); ++i) {
    const PwaMode& m = sys.modes[i];
    out[i].resize(static_cast<std::size_t>(m.num_guard_rows()));
    for (Index r = 0; r < m.num_guard_rows(); ++r) {
      Vec coef(sys.n_x + sys.n_u);
      coef << m.guard_H.row(r).transpose(), m.guard_J.row(r).transpose();
      out[i][static_cast<std::size_t>(r)] =
          box_sup(coef, lo, hi, -m.guard_k[r]) > kGuardTol;
    }
  }
  return out;
}

}  // namespace detail

/**
 * @brief Convex QP obtained by pinning the mode sequence of the hybrid OCP.
 *
 * Decision vector z = (u_0..u_{N-1}, x_1..x_N). Equalities carry the
 * per-step affine dynamics of the assigned modes; inequalities carry the
 * assigned-mode guards, the global state/input boxes, and the terminal
 * set. The constant stage cost of x_0 = x_p lands in the objective offset
 * so QP objectives equal full OCP objectives.
 */
inline DenseQp assemble_fixed_mode_ocp(const HybridOcp& ocp, const ModeSequence& modes,
                                       const Vec& x_p) {
  detail::check_mode_sequence(ocp, modes);
  const PwaSystem& sys = ocp.system;
  if (x_p.size() != sys.n_x)
    throw DimensionMismatch("assemble_fixed_mode_ocp: x_p dimension");
  const Index n_x = sys.n_x;
  const Index n_u = sys.n_u;
  const int N = ocp.N;
  const Index n = static_cast<Index>(N) * (n_u + n_x);
  const auto u_off = [&](int t) { return static_cast<Index>(t) * n_u; };
  const auto x_off = [&](int t) {
    return static_cast<Index>(N) * n_u + static_cast<Index>(t - 1) * n_x;
  };

  DenseQp qp;
  qp.H = Mat::Zero(n, n);
  qp.g = Vec::Zero(n);
  qp.c0 = x_p.dot(ocp.Q * x_p);
  for (int t = 0; t < N; ++t) qp.H.block(u_off(t), u_off(t), n_u, n_u) = 2.0 * ocp.R;
  for (int t = 1; t < N; ++t) qp.H.block(x_off(t), x_off(t), n_x, n_x) = 2.0 * ocp.Q;
  qp.H.block(x_off(N), x_off(N), n_x, n_x) = 2.0 * ocp.P_term;

  qp.A_eq = Mat::Zero(static_cast<Index>(N) * n_x, n);
  qp.b_eq = Vec::Zero(static_cast<Index>(N) * n_x);
  for (int t = 0; t < N; ++t) {
    const PwaMode& m = sys.modes[static_cast<std::size_t>(modes[static_cast<std::size_t>(t)])];
    const Index row = static_cast<Index>(t) * n_x;
    qp.A_eq.block(row, x_off(t + 1), n_x, n_x) = Mat::Identity(n_x, n_x);
    qp.A_eq.block(row, u_off(t), n_x, n_u) = -m.B;
    qp.b_eq.segment(row, n_x) = m.c;
    if (t == 0)
      qp.b_eq.segment(row, n_x) += m.A * x_p;
    else
      qp.A_eq.block(row, x_off(t), n_x, n_x) = -m.A;
  }

  // guard rows implied by the global box never bind and are skipped
  const auto binding = detail::binding_guard_rows(sys);
  Index n_guard = 0;
  for (int t = 0; t < N; ++t)
    for (bool b : binding[static_cast<std::size_t>(modes[static_cast<std::size_t>(t)])])
      n_guard += b ? 1 : 0;
  const Index n_box = 2 * static_cast<Index>(N) * (n_x + n_u);
  const Index n_term = ocp.terminal_set ? ocp.terminal_set->num_rows() : 0;
  qp.A_in = Mat::Zero(n_guard + n_box + n_term, n);
  qp.b_in = Vec::Zero(n_guard + n_box + n_term);

  Index row = 0;
  for (int t = 0; t < N; ++t) {
    const std::size_t mi = static_cast<std::size_t>(modes[static_cast<std::size_t>(t)]);
    const PwaMode& m = sys.modes[mi];
    for (Index r = 0; r < m.num_guard_rows(); ++r) {
      if (!binding[mi][static_cast<std::size_t>(r)]) continue;
      qp.A_in.block(row, u_off(t), 1, n_u) = m.guard_J.row(r);
      qp.b_in[row] = m.guard_k[r] + kGuardTol;
      if (t == 0)
        qp.b_in[row] -= m.guard_H.row(r).dot(x_p);
      else
        qp.A_in.block(row, x_off(t), 1, n_x) = m.guard_H.row(r);
      ++row;
    }
  }
  for (int t = 1; t <= N; ++t) {
    qp.A_in.block(row, x_off(t), n_x, n_x) = Mat::Identity(n_x, n_x);
    qp.b_in.segment(row, n_x) = sys.x_max;
    row += n_x;
    qp.A_in.block(row, x_off(t), n_x, n_x) = -Mat::Identity(n_x, n_x);
    qp.b_in.segment(row, n_x) = -sys.x_min;
    row += n_x;
  }
  for (int t = 0; t < N; ++t) {
    qp.A_in.block(row, u_off(t), n_u, n_u) = Mat::Identity(n_u, n_u);
    qp.b_in.segment(row, n_u) = sys.u_max;
    row += n_u;
    qp.A_in.block(row, u_off(t), n_u, n_u) = -Mat::Identity(n_u, n_u);
    qp.b_in.segment(row, n_u) = -sys.u_min;
    row += n_u;
  }
  if (n_term > 0) {
    qp.A_in.block(row, x_off(N), n_term, n_x) = ocp.terminal_set->F;
    qp.b_in.segment(row, n_term) = ocp.terminal_set->g;
  }
  return qp;
}

/// Splits a stacked decision vector into input and state trajectories;
/// x gains a leading column for x_0 = x_p.
inline void unpack_trajectories(const HybridOcp& ocp, const Vec& z, const Vec& x_p,
                                Mat& u, Mat& x) {
  const Index n_x = ocp.system.n_x;
  const Index n_u = ocp.system.n_u;
  const int N = ocp.N;
  u.resize(n_u, N);
  x.resize(n_x, N + 1);
  x.col(0) = x_p;
  for (int t = 0; t < N; ++t) u.col(t) = z.segment(static_cast<Index>(t) * n_u, n_u);
  for (int t = 1; t <= N; ++t)
    x.col(t) = z.segment(static_cast<Index>(N) * n_u + static_cast<Index>(t - 1) * n_x, n_x);
}

/// Stage-wise OCP objective evaluated directly from trajectories.
inline double ocp_objective(const HybridOcp& ocp, const Mat& u, const Mat& x) {
  double obj = 0.0;
  for (int t = 0; t < ocp.N; ++t)
    obj += x.col(t).dot(ocp.Q * x.col(t)) + u.col(t).dot(ocp.R * u.col(t));
  obj += x.col(ocp.N).dot(ocp.P_term * x.col(ocp.N));
  return obj;
}

/// Constraint-by-constraint audit of a candidate hybrid OCP solution,
/// evaluated straight from the system matrices (no solver code involved).
struct SolutionAudit {
  double dynamics_residual = 0.0;
  double guard_violation = 0.0;
  double bound_violation = 0.0;
  double terminal_violation = 0.0;
  double objective = 0.0;

  double worst() const {
    return std::max({dynamics_residual, guard_violation, bound_violation,
                     terminal_violation});
  }
  bool within(double tol) const { return worst() <= tol; }
};

inline SolutionAudit audit_solution(const HybridOcp& ocp, const ModeSequence& modes,
                                    const Mat& u, const Mat& x) {
  detail::check_mode_sequence(ocp, modes);
  const PwaSystem& sys = ocp.system;
  SolutionAudit a;
  for (int t = 0; t < ocp.N; ++t) {
    const PwaMode& m = sys.modes[static_cast<std::size_t>(modes[static_cast<std::size_t>(t)])];
    const Vec resid = x.col(t + 1) - m.A * x.col(t) - m.B * u.col(t) - m.c;
    a.dynamics_residual = std::max(a.dynamics_residual, resid.cwiseAbs().maxCoeff());
    if (m.num_guard_rows() > 0)
      a.guard_violation = std::max(
          a.guard_violation, m.guard_values(x.col(t), u.col(t)).maxCoeff());
    a.bound_violation = std::max({a.bound_violation,
                                  (u.col(t) - sys.u_max).maxCoeff(),
                                  (sys.u_min - u.col(t)).maxCoeff()});
  }
  for (int t = 1; t <= ocp.N; ++t)
    a.bound_violation = std::max({a.bound_violation,
                                  (x.col(t) - sys.x_max).maxCoeff(),
                                  (sys.x_min - x.col(t)).maxCoeff()});
  a.bound_violation = std::max(a.bound_violation, 0.0);
  a.guard_violation = std::max(a.guard_violation, 0.0);
  if (ocp.terminal_set && ocp.terminal_set->num_rows() > 0)
    a.terminal_violation = ocp.terminal_set->violation(x.col(ocp.N));
  a.objective = ocp_objective(ocp, u, x);
  return a;
}

}  // namespace lnms
