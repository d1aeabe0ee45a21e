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

#include <cstddef>
#include <initializer_list>
#include <vector>

namespace lnms {

/**
 * @brief Length-N assignment of one active mode per horizon step.
 *
 * Stored as zero-based mode indices; the one-hot binary encoding of the
 * mixed-integer formulation is recovered on demand. Exactly one mode per
 * step holds by representation.
 */
struct ModeSequence {
  std::vector<int> entries;

  ModeSequence() = default;
  explicit ModeSequence(std::vector<int> e) : entries(std::move(e)) {}
  ModeSequence(std::initializer_list<int> e) : entries(e) {}

  static ModeSequence constant(std::size_t horizon, int mode) {
    return ModeSequence(std::vector<int>(horizon, mode));
  }

  std::size_t size() const { return entries.size(); }
  int operator[](std::size_t t) const { return entries[t]; }

  bool operator==(const ModeSequence& other) const { return entries == other.entries; }
  bool operator!=(const ModeSequence& other) const { return entries != other.entries; }
  bool operator<(const ModeSequence& other) const { return entries < other.entries; }
};

}  // namespace lnms
