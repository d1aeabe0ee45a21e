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

#include <stdexcept>
#include <string>

namespace lnms {

/// Base class for all lnms exceptions.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// No mode guard holds at a queried (x, u) point; the system definition
/// has a coverage gap.
struct NoActiveMode : Error {
  using Error::Error;
};

/// A constructor or builder argument is outside its admissible range.
struct InvalidParameter : Error {
  using Error::Error;
};

/// Operands have inconsistent dimensions.
struct DimensionMismatch : Error {
  using Error::Error;
};

/// An iterative routine failed to reach its residual target.
struct NoConvergence : Error {
  using Error::Error;
};

/// A mode sequence has the wrong length or an out-of-range mode index.
struct InvalidModeSequence : Error {
  using Error::Error;
};

/// Big-M computation requires finite state/input boxes.
struct UnboundedBox : Error {
  using Error::Error;
};

/// Exhaustive enumeration refused: n_M^N exceeds the safety cap.
struct TooManySequences : Error {
  using Error::Error;
};

/// No mode sequence admits a feasible solution at the queried state.
struct InfeasibleProblem : Error {
  using Error::Error;
};

/// A sampling region is malformed or outside the system bounds.
struct InvalidRegion : Error {
  using Error::Error;
};

/// Grid export is only defined for planar state spaces.
struct UnsupportedDimension : Error {
  using Error::Error;
};

}  // namespace lnms
