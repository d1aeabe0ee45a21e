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
#include "lnms/types.hpp"

namespace lnms::detail {

// Matrices are serialized as flat row-major number arrays; shapes are
// recovered from the surrounding document.

inline nlohmann::json matrix_to_flat(const Mat& m) {
  nlohmann::json arr = nlohmann::json::array();
  for (Index r = 0; r < m.rows(); ++r)
    for (Index c = 0; c < m.cols(); ++c) arr.push_back(m(r, c));
  return arr;
}

inline Mat flat_to_matrix(const nlohmann::json& arr, Index rows, Index cols) {
  if (static_cast<Index>(arr.size()) != rows * cols)
    throw DimensionMismatch("flat_to_matrix: element count does not match shape");
  Mat m(rows, cols);
  Index k = 0;
  for (Index r = 0; r < rows; ++r)
    for (Index c = 0; c < cols; ++c) m(r, c) = arr[k++].get<double>();
  return m;
}

inline nlohmann::json vector_to_array(const Vec& v) {
  nlohmann::json arr = nlohmann::json::array();
  for (Index i = 0; i < v.size(); ++i) arr.push_back(v[i]);
  return arr;
}

inline Vec array_to_vector(const nlohmann::json& arr) {
  Vec v(static_cast<Index>(arr.size()));
  for (Index i = 0; i < v.size(); ++i) v[i] = arr[static_cast<std::size_t>(i)].get<double>();
  return v;
}

}  // namespace lnms::detail
