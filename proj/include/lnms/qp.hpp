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

#include <Eigen/Cholesky>
#include <Eigen/Sparse>
#include <Eigen/SparseLU>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <memory>
#include <vector>

#include "lnms/errors.hpp"
#include "lnms/types.hpp"

namespace lnms {

/**
 * @brief Dense convex QP in canonical form.
 *
 * minimize 0.5 z'Hz + g'z + c0
 * subject to A_eq z = b_eq, A_in z <= b_in.
 *
 * H must be symmetric positive semidefinite; a zero H turns the problem
 * into an LP, which the solver accepts.
 */
struct DenseQp {
  Mat H;
  Vec g;
  Mat A_eq;
  Vec b_eq;
  Mat A_in;
  Vec b_in;
  double c0 = 0.0;  ///< constant objective offset

  Index num_vars() const { return g.size(); }
  Index num_eq() const { return b_eq.size(); }
  Index num_in() const { return b_in.size(); }

  void validate() const {
    const Index n = num_vars();
    if (H.rows() != n || H.cols() != n)
      throw DimensionMismatch("DenseQp: H must be n by n");
    if (n > 0) {
      const double scale = std::max(1.0, H.cwiseAbs().maxCoeff());
      if ((H - H.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale)
        throw InvalidParameter("DenseQp: H must be symmetric");
    }
    if (A_eq.rows() != num_eq() || (num_eq() > 0 && A_eq.cols() != n))
      throw DimensionMismatch("DenseQp: equality block shape");
    if (A_in.rows() != num_in() || (num_in() > 0 && A_in.cols() != n))
      throw DimensionMismatch("DenseQp: inequality block shape");
  }

  double objective_at(const Vec& z) const {
    return 0.5 * z.dot(H * z) + g.dot(z) + c0;
  }

  /// Largest constraint violation at z (equalities by absolute value).
  double violation_at(const Vec& z) const {
    double v = 0.0;
    if (num_eq() > 0) v = (A_eq * z - b_eq).cwiseAbs().maxCoeff();
    if (num_in() > 0) v = std::max(v, (A_in * z - b_in).maxCoeff());
    return std::max(v, 0.0);
  }
};

enum class QpStatus { Optimal, Infeasible, MaxIter };

inline const char* to_string(QpStatus s) {
  switch (s) {
    case QpStatus::Optimal: return "Optimal";
    case QpStatus::Infeasible: return "Infeasible";
    case QpStatus::MaxIter: return "MaxIter";
  }
  return "?";
}

struct QpSolution {
  Vec z;
  Vec lambda_eq;
  Vec lambda_in;
  double objective = std::numeric_limits<double>::quiet_NaN();
  QpStatus status = QpStatus::MaxIter;
  int iterations = 0;
  double solve_time = 0.0;
  /// Separating certificate when status == Infeasible: phase-1 duals
  /// (order: [A_eq <=, A_eq >=, A_in] rows) plus the optimal slack.
  Vec infeasibility_certificate;
  double max_violation = 0.0;
};

struct QpConfig {
  double tol_stationarity = 1e-9;
  double tol_feasibility = 1e-9;
  double tol_complementarity = 1e-9;
  int max_iter = 100;
  bool polish = true;
  /// Violation threshold of the phase-1 problem above which the QP is
  /// declared infeasible. Sits well above solver noise by design contract.
  double infeasibility_threshold = 1e-7;
};

namespace detail {

struct IpmProblem {
  const Mat* H;
  const Vec* g;
  const Mat* G;   // equalities
  const Vec* be;
  const Mat* A;   // inequalities
  const Vec* bi;
};

struct IpmState {
  Vec z, y, lam, s;
  int iterations = 0;
  bool converged = false;
  bool diverged = false;  // dual blow-up, suggests primal infeasibility
};

/// Sparse KKT assembly and LU factorization for the reduced Newton system
/// [H+dI  G'  A'; G  -dI  0; A  0  -(D+dI)].
class KktFactor {
 public:
  KktFactor(const IpmProblem& p, double delta) : p_(p), delta_(delta) {
    n_ = p.g->size();
    me_ = p.be->size();
    mi_ = p.bi->size();
    dim_ = n_ + me_ + mi_;
    base_triplets_.reserve(static_cast<std::size_t>(dim_) * 8);
    for (Index i = 0; i < n_; ++i)
      for (Index j = 0; j < n_; ++j)
        if ((*p.H)(i, j) != 0.0 && i != j)
          base_triplets_.emplace_back(i, j, (*p.H)(i, j));
    for (Index i = 0; i < n_; ++i)
      base_triplets_.emplace_back(i, i, (*p.H)(i, i) + delta_);
    for (Index r = 0; r < me_; ++r) {
      for (Index j = 0; j < n_; ++j) {
        const double v = (*p.G)(r, j);
        if (v != 0.0) {
          base_triplets_.emplace_back(n_ + r, j, v);
          base_triplets_.emplace_back(j, n_ + r, v);
        }
      }
      base_triplets_.emplace_back(n_ + r, n_ + r, -delta_);
    }
    diag_slots_.reserve(static_cast<std::size_t>(mi_));
    for (Index r = 0; r < mi_; ++r) {
      for (Index j = 0; j < n_; ++j) {
        const double v = (*p.A)(r, j);
        if (v != 0.0) {
          base_triplets_.emplace_back(n_ + me_ + r, j, v);
          base_triplets_.emplace_back(j, n_ + me_ + r, v);
        }
      }
      // diagonal placeholder, overwritten by update()
      diag_slots_.push_back(base_triplets_.size());
      base_triplets_.emplace_back(n_ + me_ + r, n_ + me_ + r, -1.0);
    }
    kkt_.resize(dim_, dim_);
  }

  /// Refactorizes with the current barrier diagonal D = s / lam.
  bool update(const Vec& d) {
    auto triplets = base_triplets_;
    for (Index r = 0; r < mi_; ++r)
      triplets[diag_slots_[static_cast<std::size_t>(r)]] =
          Eigen::Triplet<double>(n_ + me_ + r, n_ + me_ + r, -(d[r] + delta_));
    kkt_.setFromTriplets(triplets.begin(), triplets.end());
    if (!analyzed_) {
      lu_.analyzePattern(kkt_);
      analyzed_ = true;
    }
    lu_.factorize(kkt_);
    return lu_.info() == Eigen::Success;
  }

  /// Solves the *unregularized* system by iterative refinement against the
  /// regularized factors; d is the current barrier diagonal.
  Vec solve_refined(const Vec& rhs, const Vec& d, int refinements = 2) const {
    Vec sol = lu_.solve(rhs);
    for (int k = 0; k < refinements; ++k) {
      Vec resid = rhs - multiply_unregularized(sol, d);
      sol += lu_.solve(resid);
    }
    return sol;
  }

  Index n() const { return n_; }
  Index me() const { return me_; }
  Index mi() const { return mi_; }

 private:
  Vec multiply_unregularized(const Vec& v, const Vec& d) const {
    Vec out(dim_);
    const auto vz = v.head(n_);
    const auto vy = v.segment(n_, me_);
    const auto vl = v.tail(mi_);
    out.head(n_) = (*p_.H) * vz;
    if (me_ > 0) out.head(n_) += p_.G->transpose() * vy;
    if (mi_ > 0) out.head(n_) += p_.A->transpose() * vl;
    if (me_ > 0) out.segment(n_, me_) = (*p_.G) * vz;
    if (mi_ > 0) out.tail(mi_) = (*p_.A) * vz - d.cwiseProduct(vl);
    return out;
  }

  IpmProblem p_;
  double delta_;
  Index n_ = 0, me_ = 0, mi_ = 0, dim_ = 0;
  std::vector<Eigen::Triplet<double>> base_triplets_;
  std::vector<std::size_t> diag_slots_;
  Eigen::SparseMatrix<double> kkt_;
  Eigen::SparseLU<Eigen::SparseMatrix<double>, Eigen::COLAMDOrdering<int>> lu_;
  bool analyzed_ = false;
};

inline double max_step(const Vec& v, const Vec& dv) {
  double alpha = 1.0;
  for (Index i = 0; i < v.size(); ++i)
    if (dv[i] < 0.0) alpha = std::min(alpha, -v[i] / dv[i]);
  return alpha;
}

/// Mehrotra predictor-corrector on the slack form of the QP. Equality-only
/// and unconstrained problems never reach this routine.
inline IpmState ipm(const IpmProblem& p, const QpConfig& cfg,
                    const Vec* z_init = nullptr) {
  const Index n = p.g->size();
  const Index me = p.be->size();
  const Index mi = p.bi->size();

  IpmState st;
  st.z = z_init ? *z_init : Vec::Zero(n);
  st.y = Vec::Zero(me);
  st.lam = Vec::Ones(mi);
  st.s = (*p.bi - (*p.A) * st.z).cwiseMax(1.0);

  // complementarity can only be driven to roundoff relative to the slack
  // magnitudes; once progress on it stalls at a scale-relative level, the
  // caller's polish step closes the remaining gap exactly
  double b_scale = 1.0;
  if (mi > 0) b_scale += p.bi->cwiseAbs().maxCoeff();
  if (me > 0) b_scale += p.be->cwiseAbs().maxCoeff();
  const double comp_exit = std::max(cfg.tol_complementarity, 1e-6 * b_scale);
  double best_comp = std::numeric_limits<double>::infinity();
  IpmState best_state;
  int comp_stalls = 0;

  double delta = 1e-9;
  auto factor = std::make_unique<KktFactor>(p, delta);

  for (int it = 0; it < cfg.max_iter; ++it) {
    st.iterations = it;
    Vec r_d = (*p.H) * st.z + *p.g;
    if (me > 0) r_d += p.G->transpose() * st.y;
    if (mi > 0) r_d += p.A->transpose() * st.lam;
    Vec r_e = me > 0 ? Vec((*p.G) * st.z - *p.be) : Vec();
    Vec r_i = (*p.A) * st.z + st.s - *p.bi;

    const double stat = r_d.size() > 0 ? r_d.cwiseAbs().maxCoeff() : 0.0;
    const double prim = std::max(me > 0 ? r_e.cwiseAbs().maxCoeff() : 0.0,
                                 mi > 0 ? r_i.cwiseAbs().maxCoeff() : 0.0);
    const double compmax = st.s.cwiseProduct(st.lam).maxCoeff();
#ifdef LNMS_IPM_TRACE
    std::fprintf(stderr, "ipm it=%d stat=%.3e prim=%.3e comp=%.3e\n", it, stat, prim,
                 compmax);
#endif
    if (stat < cfg.tol_stationarity && prim < cfg.tol_feasibility) {
      if (compmax < cfg.tol_complementarity) {
        st.converged = true;
        return st;
      }
      if (compmax < 0.5 * best_comp) {
        best_comp = compmax;
        best_state = st;
        best_state.converged = true;
        comp_stalls = 0;
      } else if (++comp_stalls >= 3 && best_comp < comp_exit) {
        return best_state;  // endgame limited by slack scale; polish takes over
      }
    }

    // Dual blow-up with stalled primal residual is the classic signature of
    // an infeasible primal; bail out so the caller can certify via phase 1.
    const double dual_norm = std::max(st.lam.cwiseAbs().maxCoeff(),
                                      me > 0 ? st.y.cwiseAbs().maxCoeff() : 0.0);
    const double mu = st.s.dot(st.lam) / static_cast<double>(mi);
    if (it >= 20 && prim > 1e-7 && (dual_norm > 1e9 || mu < 1e-13)) {
      st.diverged = true;
      return st;
    }

    Vec d = st.s.cwiseQuotient(st.lam).cwiseMax(1e-14).cwiseMin(1e14);
    bool ok = factor->update(d);
    for (int attempt = 0; !ok && attempt < 3; ++attempt) {
      delta *= 100.0;
      factor = std::make_unique<KktFactor>(p, delta);
      ok = factor->update(d);
    }
    if (!ok) {
      st.diverged = true;
      return st;
    }

    Vec rhs(n + me + mi);
    rhs.head(n) = -r_d;
    if (me > 0) rhs.segment(n, me) = -r_e;
    rhs.tail(mi) = -r_i + st.s;

    Vec sol = factor->solve_refined(rhs, d);
    Vec dz_a = sol.head(n);
    Vec dl_a = sol.tail(mi);
    Vec ds_a = -r_i - (*p.A) * dz_a;

    const double ap_a = max_step(st.s, ds_a);
    const double ad_a = max_step(st.lam, dl_a);
    const double mu_aff = (st.s + ap_a * ds_a).dot(st.lam + ad_a * dl_a) /
                          static_cast<double>(mi);
    double sigma = mu > 0.0 ? std::pow(mu_aff / mu, 3.0) : 0.0;
    sigma = std::clamp(sigma, 0.0, 1.0);

    rhs.tail(mi) = -r_i + st.s -
                   (Vec::Constant(mi, sigma * mu) - ds_a.cwiseProduct(dl_a))
                       .cwiseQuotient(st.lam);
    sol = factor->solve_refined(rhs, d);
    Vec dz = sol.head(n);
    Vec dy = sol.segment(n, me);
    Vec dl = sol.tail(mi);
    Vec ds = -r_i - (*p.A) * dz;

    const double ap = std::min(1.0, 0.99 * max_step(st.s, ds));
    const double ad = std::min(1.0, 0.99 * max_step(st.lam, dl));
    st.z += ap * dz;
    st.s += ap * ds;
    if (me > 0) st.y += ad * dy;
    st.lam += ad * dl;
  }
  if (best_comp < comp_exit) return best_state;
  st.iterations = cfg.max_iter;
  return st;
}

/// Equality-constrained (or unconstrained) QP via one saddle-point solve
/// with iterative refinement. A small absolute regularization keeps the
/// factorization alive on rank-deficient constraint rows; refinement runs
/// against the unregularized system, escalating delta only on failure.
inline bool solve_equality_qp(const Mat& H, const Vec& g, const Mat& G,
                              const Vec& be, Vec& z, Vec& y) {
  const Index n = g.size();
  const Index me = be.size();
  const double scale = std::max({1.0, g.cwiseAbs().maxCoeff(),
                                 me > 0 ? be.cwiseAbs().maxCoeff() : 0.0});
  Vec rhs(n + me);
  rhs.head(n) = -g;
  rhs.tail(me) = be;

  auto residual = [&](const Vec& sol) {
    Vec resid(n + me);
    resid.head(n) = -g - H * sol.head(n);
    if (me > 0) {
      resid.head(n) -= G.transpose() * sol.tail(me);
      resid.tail(me) = be - G * sol.head(n);
    }
    return resid;
  };

  Vec best_sol;
  double best_r = std::numeric_limits<double>::infinity();
  for (const double delta : {1e-11, 1e-7}) {
    Mat K = Mat::Zero(n + me, n + me);
    K.topLeftCorner(n, n) = H + delta * Mat::Identity(n, n);
    if (me > 0) {
      K.topRightCorner(n, me) = G.transpose();
      K.bottomLeftCorner(me, n) = G;
      K.bottomRightCorner(me, me) = -delta * Mat::Identity(me, me);
    }
    Eigen::PartialPivLU<Mat> lu(K);
    Vec sol = lu.solve(rhs);
    double r = residual(sol).cwiseAbs().maxCoeff();
    for (int k = 0; k < 10 && r > 1e-11 * scale; ++k) {
      const Vec step = lu.solve(residual(sol));
      if (!step.allFinite()) break;
      const Vec next = sol + step;
      const double rn = residual(next).cwiseAbs().maxCoeff();
      if (!(rn < r)) break;
      sol = next;
      r = rn;
    }
    if (r < best_r && sol.allFinite()) {
      best_r = r;
      best_sol = sol;
    }
    if (best_r < 1e-9 * scale) break;
  }
  if (best_sol.size() == 0) return false;
  z = best_sol.head(n);
  y = best_sol.tail(me);
  return best_r < 1e-8 * scale;
}

/// Phase-1 LP: minimize the uniform constraint relaxation t.
inline DenseQp build_phase1(const DenseQp& qp) {
  const Index n = qp.num_vars();
  const Index me = qp.num_eq();
  const Index mi = qp.num_in();
  DenseQp p1;
  p1.H = Mat::Zero(n + 1, n + 1);
  p1.g = Vec::Zero(n + 1);
  p1.g[n] = 1.0;
  p1.A_eq = Mat(0, n + 1);
  p1.b_eq = Vec(0);
  p1.A_in = Mat::Zero(2 * me + mi + 1, n + 1);
  p1.b_in = Vec::Zero(2 * me + mi + 1);
  if (me > 0) {
    p1.A_in.block(0, 0, me, n) = qp.A_eq;
    p1.b_in.head(me) = qp.b_eq;
    p1.A_in.block(me, 0, me, n) = -qp.A_eq;
    p1.b_in.segment(me, me) = -qp.b_eq;
  }
  if (mi > 0) {
    p1.A_in.block(2 * me, 0, mi, n) = qp.A_in;
    p1.b_in.segment(2 * me, mi) = qp.b_in;
  }
  p1.A_in.col(n).head(2 * me + mi).setConstant(-1.0);
  p1.A_in(2 * me + mi, n) = -1.0;  // t >= 0
  return p1;
}

}  // namespace detail

struct FeasibilityCheck {
  bool feasible = false;
  double max_violation = 0.0;
  Vec point;        ///< best relaxation point found (without the slack)
  Vec certificate;  ///< phase-1 duals when infeasible
  bool certified = false;
};

/**
 * @brief Feasibility test by a phase-1 slack minimization.
 *
 * Solves min t subject to the constraints relaxed by t on both sides and
 * t >= 0; the problem always has a strictly interior point, so the interior
 * point method is on safe ground. Feasible iff the optimal slack stays
 * below the threshold.
 */
inline FeasibilityCheck check_feasibility(const DenseQp& qp, double tol = 1e-7) {
  qp.validate();
  FeasibilityCheck out;
  const Index n = qp.num_vars();
  if (qp.num_eq() == 0 && qp.num_in() == 0) {
    out.feasible = true;
    out.certified = true;
    out.point = Vec::Zero(n);
    return out;
  }
  const DenseQp p1 = detail::build_phase1(qp);
  detail::IpmProblem prob{&p1.H, &p1.g, &p1.A_eq, &p1.b_eq, &p1.A_in, &p1.b_in};
  QpConfig cfg;
  cfg.max_iter = 200;
  // interior start: relax all constraints by a comfortable margin
  Vec z0 = Vec::Zero(n + 1);
  double v0 = 0.0;
  for (Index r = 0; r < p1.num_in() - 1; ++r) v0 = std::max(v0, -p1.b_in[r]);
  z0[n] = 1.1 * v0 + 1.0;
  detail::IpmState st = detail::ipm(prob, cfg, &z0);
  out.point = st.z.head(n);
  out.max_violation = std::max(qp.violation_at(out.point), 0.0);
  out.certified = st.converged;
  const double t_star = st.z[n];
  out.feasible = st.converged ? (t_star < tol) : (out.max_violation < tol);
  if (!out.feasible) out.certificate = st.lam.head(p1.num_in() - 1);
  return out;
}

/**
 * @brief Solves a dense convex QP to the library-wide KKT contract.
 *
 * Optimal solutions satisfy stationarity, feasibility and complementarity
 * within 1e-8 (verified internally before the status is granted).
 * Infeasibility is certified through the phase-1 problem rather than by
 * interior-point divergence alone.
 */
inline QpSolution solve_qp(const DenseQp& qp, const QpConfig& cfg = {}) {
  const auto t_start = std::chrono::steady_clock::now();
  qp.validate();
  QpSolution sol;
  const Index n = qp.num_vars();
  const Index me = qp.num_eq();
  const Index mi = qp.num_in();
  sol.lambda_eq = Vec::Zero(me);
  sol.lambda_in = Vec::Zero(mi);

  auto finish = [&](QpStatus status) {
    sol.status = status;
    sol.solve_time = std::chrono::duration<double>(
                         std::chrono::steady_clock::now() - t_start)
                         .count();
    return sol;
  };

  // residuals of a candidate, computed from the problem data only
  auto residuals = [&](const Vec& z, const Vec& ly, const Vec& li) {
    Vec r_d = qp.H * z + qp.g;
    if (me > 0) r_d += qp.A_eq.transpose() * ly;
    if (mi > 0) r_d += qp.A_in.transpose() * li;
    double stat = n > 0 ? r_d.cwiseAbs().maxCoeff() : 0.0;
    double prim = me > 0 ? (qp.A_eq * z - qp.b_eq).cwiseAbs().maxCoeff() : 0.0;
    double comp = 0.0;
    double dneg = 0.0;
    if (mi > 0) {
      Vec slack = qp.b_in - qp.A_in * z;
      prim = std::max(prim, (-slack).maxCoeff());
      comp = li.cwiseProduct(slack).cwiseAbs().maxCoeff();
      dneg = std::max(0.0, -li.minCoeff());
    }
    return std::max({stat, prim, comp, dneg});
  };

  if (mi == 0) {
    Vec z, y;
    const bool ok = detail::solve_equality_qp(qp.H, qp.g, qp.A_eq, qp.b_eq, z, y);
    if (ok) {
      sol.z = z;
      sol.lambda_eq = y;
      sol.objective = qp.objective_at(z);
      sol.iterations = 1;
      return finish(QpStatus::Optimal);
    }
    if (me == 0) return finish(QpStatus::MaxIter);
    FeasibilityCheck fc = check_feasibility(qp, cfg.infeasibility_threshold);
    if (!fc.feasible) {
      sol.z = fc.point;
      sol.max_violation = fc.max_violation;
      sol.infeasibility_certificate = fc.certificate;
      return finish(QpStatus::Infeasible);
    }
    return finish(QpStatus::MaxIter);
  }

  detail::IpmProblem prob{&qp.H, &qp.g, &qp.A_eq, &qp.b_eq, &qp.A_in, &qp.b_in};

  Vec z, ly, li;
  double best = std::numeric_limits<double>::infinity();

  // Equality-solve on the barrier-identified active set; adopted only when
  // it sharpens the KKT residuals. Inactive multipliers become exactly
  // zero, which is what closes the complementarity contract on problems
  // with large slack magnitudes.
  auto try_polish = [&](const detail::IpmState& st) {
    std::vector<Index> active;
    for (Index i = 0; i < mi; ++i)
      if (st.lam[i] > st.s[i]) active.push_back(i);
    const Index ma = static_cast<Index>(active.size());
    Mat G_all(me + ma, n);
    Vec b_all(me + ma);
    if (me > 0) {
      G_all.topRows(me) = qp.A_eq;
      b_all.head(me) = qp.b_eq;
    }
    for (Index k = 0; k < ma; ++k) {
      G_all.row(me + k) = qp.A_in.row(active[static_cast<std::size_t>(k)]);
      b_all[me + k] = qp.b_in[active[static_cast<std::size_t>(k)]];
    }
    Vec zp, yp;
    detail::solve_equality_qp(qp.H, qp.g, G_all, b_all, zp, yp);
    if (zp.size() != n || !zp.allFinite()) return;
    Vec lyp = me > 0 ? Vec(yp.head(me)) : Vec();
    Vec lip = Vec::Zero(mi);
    for (Index k = 0; k < ma; ++k)
      lip[active[static_cast<std::size_t>(k)]] = yp[me + k];
    const double r = residuals(zp, lyp, lip);
    if (r < best) {
      best = r;
      z = zp;
      ly = lyp;
      li = lip;
    }
  };

  auto adopt = [&](const detail::IpmState& st) {
    const double r = residuals(st.z, st.y, st.lam);
    if (r < best) {
      best = r;
      z = st.z;
      ly = st.y;
      li = st.lam;
    }
    if (cfg.polish) try_polish(st);
  };

  detail::IpmState st = detail::ipm(prob, cfg);
  sol.iterations = st.iterations;
  adopt(st);

  if (best >= 1e-8) {
    // not at contract accuracy: certify infeasibility or retry once from a
    // feasible phase-1 point
    FeasibilityCheck fc = check_feasibility(qp, cfg.infeasibility_threshold);
    if (!fc.feasible && fc.certified) {
      sol.z = fc.point;
      sol.max_violation = fc.max_violation;
      sol.infeasibility_certificate = fc.certificate;
      return finish(QpStatus::Infeasible);
    }
    QpConfig retry = cfg;
    retry.max_iter = 2 * cfg.max_iter;
    st = detail::ipm(prob, retry, &fc.point);
    sol.iterations += st.iterations;
    adopt(st);
  }

  if (best == std::numeric_limits<double>::infinity()) return finish(QpStatus::MaxIter);
  sol.z = z;
  sol.lambda_eq = ly;
  sol.lambda_in = li;
  sol.objective = qp.objective_at(z);
  sol.max_violation = qp.violation_at(z);
  if (best < 1e-8) return finish(QpStatus::Optimal);
  return finish(QpStatus::MaxIter);
}

}  // namespace lnms
