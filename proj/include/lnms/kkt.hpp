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

#include "lnms/qp.hpp"
#include "lnms/types.hpp"

namespace lnms {

/// First-order optimality residuals of a primal/dual candidate, computed
/// directly from the problem data. Deliberately independent of the solver
/// internals so it can serve as an external verification path.
struct KktReport {
  double stationarity = 0.0;     ///< ||Hz + g + A_eq'y + A_in'l||_inf
  double eq_violation = 0.0;     ///< ||A_eq z - b_eq||_inf
  double in_violation = 0.0;     ///< max(0, A_in z - b_in)
  double complementarity = 0.0;  ///< max_i |l_i (A_in z - b_in)_i|
  double dual_negativity = 0.0;  ///< max(0, -min_i l_i)

  double worst() const {
    return std::max({stationarity, eq_violation, in_violation, complementarity,
                     dual_negativity});
  }

  bool within(double tol) const { return worst() <= tol; }
};

inline KktReport kkt_residuals(const DenseQp& qp, const Vec& z, const Vec& lambda_eq,
                               const Vec& lambda_in) {
  KktReport rep;
  const Index n = qp.num_vars();
  if (z.size() != n || lambda_eq.size() != qp.num_eq() ||
      lambda_in.size() != qp.num_in())
    throw DimensionMismatch("kkt_residuals: candidate dimensions");

  Vec grad = qp.H * z + qp.g;
  if (qp.num_eq() > 0) grad += qp.A_eq.transpose() * lambda_eq;
  if (qp.num_in() > 0) grad += qp.A_in.transpose() * lambda_in;
  rep.stationarity = n > 0 ? grad.cwiseAbs().maxCoeff() : 0.0;

  if (qp.num_eq() > 0)
    rep.eq_violation = (qp.A_eq * z - qp.b_eq).cwiseAbs().maxCoeff();

  if (qp.num_in() > 0) {
    const Vec resid = qp.A_in * z - qp.b_in;
    rep.in_violation = std::max(0.0, resid.maxCoeff());
    rep.complementarity = lambda_in.cwiseProduct(resid).cwiseAbs().maxCoeff();
    rep.dual_negativity = std::max(0.0, -lambda_in.minCoeff());
  }
  return rep;
}

inline KktReport kkt_residuals(const DenseQp& qp, const QpSolution& sol) {
  return kkt_residuals(qp, sol.z, sol.lambda_eq, sol.lambda_in);
}

}  // namespace lnms
