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

#include "lnms/errors.hpp"
#include "lnms/json_util.hpp"
#include "lnms/types.hpp"

namespace lnms {

/// H-representation polytope {x : F x <= g}.
struct Polytope {
  Mat F;
  Vec g;

  Index num_rows() const { return F.rows(); }
  Index dim() const { return F.cols(); }

  bool contains(const Vec& x, double tol = 1e-9) const {
    if (x.size() != dim()) throw DimensionMismatch("Polytope::contains: dimension mismatch");
    return ((F * x - g).array() <= tol).all();
  }

  /// Componentwise violation max(0, Fx - g), reduced to its maximum.
  double violation(const Vec& x) const {
    if (num_rows() == 0) return 0.0;
    return std::max(0.0, (F * x - g).maxCoeff());
  }

  /// Rows rescaled to unit Euclidean norm. Zero rows are left untouched.
  Polytope normalized() const {
    Polytope out = *this;
    for (Index r = 0; r < num_rows(); ++r) {
      const double nrm = out.F.row(r).norm();
      if (nrm > 0.0) {
        out.F.row(r) /= nrm;
        out.g[r] /= nrm;
      }
    }
    return out;
  }

  /// Axis-aligned box {lo <= x <= hi} as 2n rows.
  static Polytope box(const Vec& lo, const Vec& hi) {
    const Index n = lo.size();
    if (hi.size() != n) throw DimensionMismatch("Polytope::box: lo/hi size mismatch");
    Polytope p;
    p.F = Mat::Zero(2 * n, n);
    p.g = Vec::Zero(2 * n);
    for (Index i = 0; i < n; ++i) {
      p.F(i, i) = 1.0;
      p.g[i] = hi[i];
      p.F(n + i, i) = -1.0;
      p.g[n + i] = -lo[i];
    }
    return p;
  }

  /// Stacks the rows of two polytopes over the same space.
  static Polytope stack(const Polytope& a, const Polytope& b) {
    if (a.num_rows() == 0) return b;
    if (b.num_rows() == 0) return a;
    if (a.dim() != b.dim()) throw DimensionMismatch("Polytope::stack: dimension mismatch");
    Polytope p;
    p.F.resize(a.num_rows() + b.num_rows(), a.dim());
    p.F << a.F, b.F;
    p.g.resize(a.g.size() + b.g.size());
    p.g << a.g, b.g;
    return p;
  }
};

inline void to_json(nlohmann::json& j, const Polytope& p) {
  j = nlohmann::json{{"F", detail::matrix_to_flat(p.F)},
                     {"g", detail::vector_to_array(p.g)}};
}

inline void from_json(const nlohmann::json& j, Polytope& p) {
  p.g = detail::array_to_vector(j.at("g"));
  const Index rows = p.g.size();
  p.F = detail::flat_to_matrix(j.at("F"), rows,
                               rows > 0 ? static_cast<Index>(j.at("F").size()) / rows : 0);
}

}  // namespace lnms
