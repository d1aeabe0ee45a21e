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

#include <cstddef>
#include <utility>
#include <vector>

#include "lnms/errors.hpp"
#include "lnms/json_util.hpp"
#include "lnms/types.hpp"

namespace lnms {

/**
 * @brief One affine mode of a piecewise-affine system.
 *
 * The mode is active on the region guard_H x + guard_J u <= guard_k and
 * evolves as x+ = A x + B u + c while active.
 */
struct PwaMode {
  Mat A;        ///< state transition (n_x by n_x)
  Mat B;        ///< input matrix (n_x by n_u)
  Vec c;        ///< affine offset (n_x)
  Mat guard_H;  ///< guard state part (n_g by n_x)
  Mat guard_J;  ///< guard input part (n_g by n_u)
  Vec guard_k;  ///< guard right-hand side (n_g)

  Index num_guard_rows() const { return guard_H.rows(); }

  /// Componentwise guard slack guard_H x + guard_J u - guard_k.
  Vec guard_values(const Vec& x, const Vec& u) const {
    return guard_H * x + guard_J * u - guard_k;
  }

  bool guard_holds(const Vec& x, const Vec& u, double tol = kGuardTol) const {
    if (num_guard_rows() == 0) return true;
    return (guard_values(x, u).array() <= tol).all();
  }
};

/**
 * @brief Discrete-time piecewise-affine system with global state/input boxes.
 *
 * Immutable after construction; all evaluation entry points are pure.
 */
struct PwaSystem {
  std::vector<PwaMode> modes;
  Index n_x = 0;
  Index n_u = 0;
  Vec x_min, x_max;
  Vec u_min, u_max;
  double dt = 0.0;

  std::size_t num_modes() const { return modes.size(); }

  /// Checks structural invariants; throws on violation.
  void validate() const {
    if (modes.empty()) throw InvalidParameter("PwaSystem: needs at least one mode");
    if (n_x <= 0 || n_u < 0) throw InvalidParameter("PwaSystem: bad dimensions");
    if (dt <= 0.0) throw InvalidParameter("PwaSystem: dt must be positive");
    if (x_min.size() != n_x || x_max.size() != n_x || u_min.size() != n_u ||
        u_max.size() != n_u)
      throw DimensionMismatch("PwaSystem: bound vector sizes");
    if (((x_max - x_min).array() <= 0.0).any())
      throw InvalidParameter("PwaSystem: x_min must be componentwise below x_max");
    if (n_u > 0 && ((u_max - u_min).array() <= 0.0).any())
      throw InvalidParameter("PwaSystem: u_min must be componentwise below u_max");
    for (const PwaMode& m : modes) {
      if (m.A.rows() != n_x || m.A.cols() != n_x || m.B.rows() != n_x ||
          m.B.cols() != n_u || m.c.size() != n_x)
        throw DimensionMismatch("PwaSystem: mode dynamics dimensions");
      const Index ng = m.guard_H.rows();
      if (m.guard_J.rows() != ng || m.guard_k.size() != ng ||
          m.guard_H.cols() != n_x || m.guard_J.cols() != n_u)
        throw DimensionMismatch("PwaSystem: mode guard dimensions");
      if (!m.A.allFinite() || !m.B.allFinite() || !m.c.allFinite() ||
          !m.guard_H.allFinite() || !m.guard_J.allFinite() || !m.guard_k.allFinite())
        throw InvalidParameter("PwaSystem: non-finite mode entries");
    }
  }

  bool in_state_bounds(const Vec& x, double tol = kGuardTol) const {
    return ((x - x_max).array() <= tol).all() && ((x_min - x).array() <= tol).all();
  }
};

/**
 * @brief Index of the active mode at (x, u).
 *
 * Smallest index whose guard is satisfied within kGuardTol; boundary ties
 * therefore resolve to the lower index. Throws NoActiveMode when no guard
 * holds, which signals a coverage gap in the system definition.
 */
inline std::size_t active_mode(const PwaSystem& sys, const Vec& x, const Vec& u) {
  for (std::size_t i = 0; i < sys.modes.size(); ++i)
    if (sys.modes[i].guard_holds(x, u)) return i;
  throw NoActiveMode("active_mode: no guard satisfied at queried point");
}

/// One step of the PWA dynamics: (A_i x + B_i u + c_i, i) with i the active mode.
inline std::pair<Vec, std::size_t> simulate_step(const PwaSystem& sys, const Vec& x,
                                                 const Vec& u) {
  const std::size_t i = active_mode(sys, x, u);
  const PwaMode& m = sys.modes[i];
  return {m.A * x + m.B * u + m.c, i};
}

inline void to_json(nlohmann::json& j, const PwaMode& m) {
  j = nlohmann::json{{"A", detail::matrix_to_flat(m.A)},
                     {"B", detail::matrix_to_flat(m.B)},
                     {"c", detail::vector_to_array(m.c)},
                     {"guard_H", detail::matrix_to_flat(m.guard_H)},
                     {"guard_J", detail::matrix_to_flat(m.guard_J)},
                     {"guard_k", detail::vector_to_array(m.guard_k)}};
}

inline void to_json(nlohmann::json& j, const PwaSystem& sys) {
  j = nlohmann::json{{"modes", sys.modes},
                     {"n_x", sys.n_x},
                     {"n_u", sys.n_u},
                     {"dt", sys.dt},
                     {"x_min", detail::vector_to_array(sys.x_min)},
                     {"x_max", detail::vector_to_array(sys.x_max)},
                     {"u_min", detail::vector_to_array(sys.u_min)},
                     {"u_max", detail::vector_to_array(sys.u_max)}};
}

inline void from_json(const nlohmann::json& j, PwaSystem& sys) {
  sys.n_x = j.at("n_x").get<Index>();
  sys.n_u = j.at("n_u").get<Index>();
  sys.dt = j.at("dt").get<double>();
  sys.x_min = detail::array_to_vector(j.at("x_min"));
  sys.x_max = detail::array_to_vector(j.at("x_max"));
  sys.u_min = detail::array_to_vector(j.at("u_min"));
  sys.u_max = detail::array_to_vector(j.at("u_max"));
  sys.modes.clear();
  for (const auto& jm : j.at("modes")) {
    PwaMode m;
    m.A = detail::flat_to_matrix(jm.at("A"), sys.n_x, sys.n_x);
    m.B = detail::flat_to_matrix(jm.at("B"), sys.n_x, sys.n_u);
    m.c = detail::array_to_vector(jm.at("c"));
    m.guard_k = detail::array_to_vector(jm.at("guard_k"));
    const Index ng = m.guard_k.size();
    m.guard_H = detail::flat_to_matrix(jm.at("guard_H"), ng, sys.n_x);
    m.guard_J = detail::flat_to_matrix(jm.at("guard_J"), ng, sys.n_u);
    sys.modes.push_back(std::move(m));
  }
  sys.validate();
}

}  // namespace lnms
