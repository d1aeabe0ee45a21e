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

#include "lnms/errors.hpp"
#include "lnms/pwa_system.hpp"
#include "lnms/types.hpp"

namespace lnms {

/// Parameters of the cart-with-wall contact environment.
struct CartWallParams {
  int n_walls = 1;       ///< 1 (right wall only) or 2 (mirrored left wall)
  double m = 1.0;        ///< cart mass
  double eps = 0.9;      ///< coefficient of restitution, in [0, 1]
  double dt = 0.01;      ///< sampling interval
  double x_wall = 0.75;  ///< wall position (left wall mirrored at -x_wall)
  Vec x_min = (Vec(2) << -1.0, -15.0).finished();
  Vec x_max = (Vec(2) << 1.0, 15.0).finished();
  Vec u_min = (Vec(1) << -150.0).finished();
  Vec u_max = (Vec(1) << 150.0).finished();
};

/**
 * @brief Cart in front of one or two walls.
 *
 * Free mode: x1+ = x1 + x2 dt, x2+ = x2 + u dt / m, active while the
 * drifted position x1 + x2 dt stays short of the wall. Contact mode:
 * x1+ = x1, x2+ = -eps x2 (instantaneous bounce). With two walls the left
 * wall mirrors the right one at -x_wall with identical restitution.
 */
inline PwaSystem build_cart_wall(const CartWallParams& p = {}) {
  if (p.m <= 0.0) throw InvalidParameter("build_cart_wall: mass must be positive");
  if (p.dt <= 0.0) throw InvalidParameter("build_cart_wall: dt must be positive");
  if (p.eps < 0.0 || p.eps > 1.0)
    throw InvalidParameter("build_cart_wall: restitution must lie in [0, 1]");
  if (p.n_walls != 1 && p.n_walls != 2)
    throw InvalidParameter("build_cart_wall: n_walls must be 1 or 2");

  PwaSystem sys;
  sys.n_x = 2;
  sys.n_u = 1;
  sys.dt = p.dt;
  sys.x_min = p.x_min;
  sys.x_max = p.x_max;
  sys.u_min = p.u_min;
  sys.u_max = p.u_max;

  // Drift row [1, dt]: the guards compare x1 + x2 dt against the walls.
  Eigen::RowVector2d drift(1.0, p.dt);

  PwaMode free_mode;
  free_mode.A = (Mat(2, 2) << 1.0, p.dt, 0.0, 1.0).finished();
  free_mode.B = (Mat(2, 1) << 0.0, p.dt / p.m).finished();
  free_mode.c = Vec::Zero(2);
  if (p.n_walls == 1) {
    free_mode.guard_H = drift;
    free_mode.guard_J = Mat::Zero(1, 1);
    free_mode.guard_k = Vec::Constant(1, p.x_wall);
  } else {
    free_mode.guard_H = (Mat(2, 2) << drift, -drift).finished();
    free_mode.guard_J = Mat::Zero(2, 1);
    free_mode.guard_k = Vec::Constant(2, p.x_wall);
  }

  PwaMode bounce;
  bounce.A = (Mat(2, 2) << 1.0, 0.0, 0.0, -p.eps).finished();
  bounce.B = Mat::Zero(2, 1);
  bounce.c = Vec::Zero(2);

  PwaMode right_wall = bounce;
  right_wall.guard_H = -drift;
  right_wall.guard_J = Mat::Zero(1, 1);
  right_wall.guard_k = Vec::Constant(1, -p.x_wall);

  sys.modes = {free_mode, right_wall};

  if (p.n_walls == 2) {
    PwaMode left_wall = bounce;
    left_wall.guard_H = drift;
    left_wall.guard_J = Mat::Zero(1, 1);
    left_wall.guard_k = Vec::Constant(1, -p.x_wall);
    sys.modes.push_back(left_wall);
  }

  sys.validate();
  return sys;
}

/// Parameters of the pendulum-with-elastic-wall environment. The physical
/// constants are not canonical; defaults give a visibly stiff contact.
struct ElasticPendulumParams {
  double m = 1.0;    ///< pendulum mass
  double l = 1.0;    ///< pendulum length
  double g = 10.0;   ///< gravity
  double k = 100.0;  ///< wall spring stiffness
  double d = 0.1;    ///< wall distance; contact for x1 > d / l
  double dt = 0.01;  ///< sampling interval
  Vec x_min = (Vec(2) << -0.2, -1.5).finished();
  Vec x_max = (Vec(2) << 0.2, 1.5).finished();
  Vec u_min = (Vec(1) << -6.0).finished();
  Vec u_max = (Vec(1) << 6.0).finished();
};

/**
 * @brief Inverted pendulum with an elastic wall on one side.
 *
 * Continuous dynamics are discretized by forward Euler at dt:
 * A = I + dt A_c, B = dt B_c, c = dt c_c. Mode guards encode the contact
 * switch x1 <= d/l (resp. >=) together with the state/input box, so each
 * mode region matches its domain definition exactly.
 */
inline PwaSystem build_elastic_pendulum(const ElasticPendulumParams& p = {}) {
  if (p.m <= 0.0 || p.l <= 0.0) throw InvalidParameter("build_elastic_pendulum: m, l must be positive");
  if (p.k < 0.0) throw InvalidParameter("build_elastic_pendulum: k must be nonnegative");
  if (p.d < 0.0) throw InvalidParameter("build_elastic_pendulum: d must be nonnegative");
  if (p.dt <= 0.0) throw InvalidParameter("build_elastic_pendulum: dt must be positive");

  PwaSystem sys;
  sys.n_x = 2;
  sys.n_u = 1;
  sys.dt = p.dt;
  sys.x_min = p.x_min;
  sys.x_max = p.x_max;
  sys.u_min = p.u_min;
  sys.u_max = p.u_max;

  const Mat a1c = (Mat(2, 2) << 0.0, 1.0, p.g / p.l, 0.0).finished();
  const Mat a2c = (Mat(2, 2) << 0.0, 1.0, p.g / p.l - p.k / p.m, 0.0).finished();
  const Mat bc = (Mat(2, 1) << 0.0, 1.0 / (p.m * p.l * p.l)).finished();
  const Vec c2c = (Vec(2) << 0.0, p.k * p.d / (p.m * p.l)).finished();

  // guard rows: contact switch, then the state/input box
  auto make_guard = [&](PwaMode& mode, double sign) {
    mode.guard_H = Mat::Zero(7, 2);
    mode.guard_J = Mat::Zero(7, 1);
    mode.guard_k = Vec::Zero(7);
    mode.guard_H(0, 0) = sign;
    mode.guard_k[0] = sign * (p.d / p.l);
    mode.guard_H.block(1, 0, 2, 2) = Mat::Identity(2, 2);
    mode.guard_k.segment(1, 2) = p.x_max;
    mode.guard_H.block(3, 0, 2, 2) = -Mat::Identity(2, 2);
    mode.guard_k.segment(3, 2) = -p.x_min;
    mode.guard_J(5, 0) = 1.0;
    mode.guard_k[5] = p.u_max[0];
    mode.guard_J(6, 0) = -1.0;
    mode.guard_k[6] = -p.u_min[0];
  };

  PwaMode swing;
  swing.A = Mat::Identity(2, 2) + p.dt * a1c;
  swing.B = p.dt * bc;
  swing.c = Vec::Zero(2);
  make_guard(swing, 1.0);

  PwaMode contact;
  contact.A = Mat::Identity(2, 2) + p.dt * a2c;
  contact.B = p.dt * bc;
  contact.c = p.dt * c2c;
  make_guard(contact, -1.0);

  sys.modes = {swing, contact};
  sys.validate();
  return sys;
}

}  // namespace lnms
