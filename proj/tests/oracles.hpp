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

// Independent reference computations for the test suites. Everything here
// is deliberately naive (dense batch algebra, truncated series, linear
// scans) so it shares no code path with the solvers under test.

#pragma once

#include <limits>
#include <vector>

#include "lnms/hybrid_ocp.hpp"
#include "lnms/qp.hpp"
#include "lnms/sample_store.hpp"
#include "lnms/types.hpp"

namespace oracles {

using lnms::Index;
using lnms::Mat;
using lnms::Vec;

/// Unconstrained finite-horizon LQR objective by batch least squares:
/// stack x = S_x x0 + S_u u and minimize the quadratic in u directly.
inline double batch_lqr_objective(const Mat& A, const Mat& B, const Mat& Q,
                                  const Mat& R, const Mat& P, int N, const Vec& x0) {
  const Index n_x = A.rows(), n_u = B.cols();
  Mat S_x = Mat::Zero(n_x * N, n_x);
  Mat S_u = Mat::Zero(n_x * N, n_u * N);
  Mat Apow = Mat::Identity(n_x, n_x);
  for (int t = 0; t < N; ++t) {
    Apow = A * Apow;  // A^{t+1}
    S_x.middleRows(t * n_x, n_x) = Apow;
    Mat Bpow = B;
    for (int j = t; j >= 0; --j) {
      S_u.block(t * n_x, j * n_u, n_x, n_u) = Bpow;
      Bpow = A * Bpow;
    }
  }
  Mat Qbar = Mat::Zero(n_x * N, n_x * N);
  for (int t = 0; t < N - 1; ++t) Qbar.block(t * n_x, t * n_x, n_x, n_x) = Q;
  Qbar.block((N - 1) * n_x, (N - 1) * n_x, n_x, n_x) = P;
  Mat Rbar = Mat::Zero(n_u * N, n_u * N);
  for (int t = 0; t < N; ++t) Rbar.block(t * n_u, t * n_u, n_u, n_u) = R;

  const Mat Huu = S_u.transpose() * Qbar * S_u + Rbar;
  const Vec f = S_u.transpose() * Qbar * S_x * x0;
  const Vec u = -Huu.ldlt().solve(f);
  const Vec x = S_x * x0 + S_u * u;
  double obj = x0.dot(Q * x0) + u.dot(Rbar * u) + x.dot(Qbar * x);
  return obj;
}

/// P = sum_k (A^T)^k Q A^k, truncated when terms fall below 1e-14.
inline Mat lyapunov_series(const Mat& A, const Mat& Q, int max_terms = 100000) {
  Mat P = Q;
  Mat term = Q;
  for (int k = 0; k < max_terms; ++k) {
    term = A.transpose() * term * A;
    P += term;
    if (term.cwiseAbs().maxCoeff() < 1e-14) break;
  }
  return P;
}

/// Brute-force nearest neighbor with the same arithmetic as the store.
inline std::pair<std::size_t, double> linear_scan_nn(
    const std::vector<lnms::Sample>& samples, const Vec& q, const Vec& w) {
  double best = std::numeric_limits<double>::infinity();
  std::size_t best_i = 0;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    double s = 0.0;
    for (Index k = 0; k < q.size(); ++k) {
      const double d = samples[i].x[k] - q[k];
      s += w[k] * (d * d);
    }
    if (s < best) {
      best = s;
      best_i = i;
    }
  }
  return {best_i, std::sqrt(best)};
}

/// Random convex QP with a guaranteed feasible anchor point. Equality rows
/// pass through the anchor; inequality rows keep positive slack there.
inline lnms::DenseQp random_feasible_qp(lnms::Rng& rng, int n, int me, int mi,
                                        bool strictly_convex = true) {
  lnms::DenseQp qp;
  Mat L(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) L(i, j) = rng.uniform(-1.0, 1.0);
  qp.H = L * L.transpose();
  if (strictly_convex) qp.H += 0.1 * Mat::Identity(n, n);
  qp.g = Vec::Zero(n);
  for (int i = 0; i < n; ++i) qp.g[i] = rng.uniform(-2.0, 2.0);
  Vec anchor(n);
  for (int i = 0; i < n; ++i) anchor[i] = rng.uniform(-1.0, 1.0);
  qp.A_eq = Mat(me, n);
  qp.b_eq = Vec(me);
  for (int r = 0; r < me; ++r) {
    for (int c = 0; c < n; ++c) qp.A_eq(r, c) = rng.uniform(-1.0, 1.0);
    qp.b_eq[r] = qp.A_eq.row(r).dot(anchor);
  }
  qp.A_in = Mat(mi, n);
  qp.b_in = Vec(mi);
  for (int r = 0; r < mi; ++r) {
    for (int c = 0; c < n; ++c) qp.A_in(r, c) = rng.uniform(-1.0, 1.0);
    qp.b_in[r] = qp.A_in.row(r).dot(anchor) + rng.uniform(0.01, 1.5);
  }
  return qp;
}

}  // namespace oracles
