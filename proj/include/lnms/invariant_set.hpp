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

#include <cmath>
#include <utility>

#include "lnms/errors.hpp"
#include "lnms/polytope.hpp"
#include "lnms/qp.hpp"
#include "lnms/types.hpp"

namespace lnms {

struct InvariantSetResult {
  Polytope set;
  bool converged = false;
  int iterations = 0;
};

namespace detail {

/// Max of f'x over {x : F x <= g}, by an LP through the QP solver.
/// Returns +inf when the LP does not certify a bounded optimum.
inline double lp_max(const Vec& f, const Polytope& p) {
  DenseQp lp;
  const Index n = f.size();
  lp.H = Mat::Zero(n, n);
  lp.g = -f;
  lp.A_eq = Mat(0, n);
  lp.b_eq = Vec(0);
  lp.A_in = p.F;
  lp.b_in = p.g;
  QpSolution s = solve_qp(lp);
  if (s.status != QpStatus::Optimal) return std::numeric_limits<double>::infinity();
  return -s.objective;
}

/// A row f'x <= gi is redundant when its LP maximum over `p` stays below
/// gi + 1e-9.
inline bool row_redundant(const Vec& f, double gi, const Polytope& p) {
  return lp_max(f, p) <= gi + 1e-9;
}

}  // namespace detail

/// Drops rows that are implied by the remaining ones, testing sequentially
/// so that duplicated rows keep exactly one copy.
inline Polytope remove_redundant_rows(const Polytope& p) {
  Polytope out;
  out.F = Mat(0, p.dim());
  out.g = Vec(0);
  for (Index r = 0; r < p.num_rows(); ++r) {
    Polytope rest;
    const Index remaining = p.num_rows() - r - 1;
    rest.F = Mat(out.num_rows() + remaining, p.dim());
    rest.g = Vec(out.num_rows() + remaining);
    if (out.num_rows() > 0) {
      rest.F.topRows(out.num_rows()) = out.F;
      rest.g.head(out.num_rows()) = out.g;
    }
    if (remaining > 0) {
      rest.F.bottomRows(remaining) = p.F.bottomRows(remaining);
      rest.g.tail(remaining) = p.g.tail(remaining);
    }
    if (!detail::row_redundant(p.F.row(r).transpose(), p.g[r], rest)) {
      out.F.conservativeResize(out.num_rows() + 1, p.dim());
      out.F.row(out.num_rows() - 1) = p.F.row(r);
      out.g.conservativeResize(out.g.size() + 1);
      out.g[out.g.size() - 1] = p.g[r];
    }
  }
  return out;
}

/**
 * @brief Maximal positively invariant set of x+ = A_cl x inside a polytope.
 *
 * Grows the constraint description with the back-propagated rows
 * F A_cl^k x <= g and stops at the first iteration that adds no
 * non-redundant row. Redundancy is decided per row by an LP over the
 * current set. Hits of max_iter or of the 512-row cap return the partial
 * set with converged = false.
 */
inline InvariantSetResult compute_invariant_set(const Mat& A_cl,
                                                const Polytope& constraints,
                                                int max_iter = 50) {
  if (A_cl.rows() != A_cl.cols() || A_cl.rows() != constraints.dim())
    throw DimensionMismatch("compute_invariant_set: dimensions");
  if (constraints.num_rows() == 0)
    throw InvalidParameter("compute_invariant_set: empty constraint set");

  constexpr Index kRowCap = 512;
  const Polytope base = remove_redundant_rows(constraints.normalized());

  InvariantSetResult res;
  res.set = base;
  Mat powered = base.F;  // base.F * A_cl^k
  for (int k = 1; k <= max_iter; ++k) {
    res.iterations = k;
    powered = powered * A_cl;
    bool added = false;
    for (Index r = 0; r < powered.rows(); ++r) {
      Vec f = powered.row(r).transpose();
      double gi = base.g[r];
      const double nrm = f.norm();
      if (nrm < 1e-12) continue;  // row vanished under the contraction
      f /= nrm;
      gi /= nrm;
      if (detail::row_redundant(f, gi, res.set)) continue;
      res.set.F.conservativeResize(res.set.num_rows() + 1, res.set.dim());
      res.set.F.row(res.set.num_rows() - 1) = f.transpose();
      res.set.g.conservativeResize(res.set.g.size() + 1);
      res.set.g[res.set.g.size() - 1] = gi;
      added = true;
      if (res.set.num_rows() >= kRowCap) return res;  // converged stays false
    }
    if (!added) {
      res.converged = true;
      return res;
    }
  }
  return res;
}

}  // namespace lnms
