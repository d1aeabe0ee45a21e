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

#include <algorithm>
#include <cmath>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include "lnms/errors.hpp"
#include "lnms/json_util.hpp"
#include "lnms/mode_sequence.hpp"
#include "lnms/types.hpp"

namespace lnms {

/// Weighted Euclidean distance sqrt(sum_i w_i (a_i - b_i)^2).
inline double weighted_distance(const Vec& a, const Vec& b, const Vec& w) {
  if (a.size() != b.size() || a.size() != w.size())
    throw DimensionMismatch("weighted_distance: dimensions");
  double s = 0.0;
  for (Index i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    s += w[i] * (d * d);
  }
  return std::sqrt(s);
}

struct Sample {
  Vec x;
  ModeSequence modes;
  double objective = 0.0;
};

struct NnResult {
  std::size_t index = 0;
  double distance = 0.0;
  ModeSequence modes;
};

/**
 * @brief Dataset of (state, mode sequence) pairs with exact nearest
 * neighbor under a weighted Euclidean metric.
 *
 * A k-d tree indexes the bulk of the samples; points arriving after the
 * last rebuild sit in a linear overflow list that is scanned exactly, and
 * the tree is rebuilt every 256 overflow insertions. Queries are const and
 * never mutate the index (single-writer, multi-reader contract).
 *
 * Exact re-visits of a stored state overwrite that sample's label instead
 * of growing the store; disable dedup_exact for the grow-always behavior.
 */
class SampleStore {
 public:
  SampleStore() = default;
  explicit SampleStore(Vec weights, bool dedup_exact = true)
      : weights_(std::move(weights)), dedup_exact_(dedup_exact) {
    if (weights_.size() == 0 || (weights_.array() <= 0.0).any())
      throw InvalidParameter("SampleStore: weights must be strictly positive");
  }

  std::size_t size() const { return samples_.size(); }
  bool empty() const { return samples_.empty(); }
  const Sample& sample(std::size_t i) const { return samples_.at(i); }
  const std::vector<Sample>& samples() const { return samples_; }
  const Vec& weights() const { return weights_; }
  bool dedup_exact() const { return dedup_exact_; }
  void set_dedup_exact(bool v) { dedup_exact_ = v; }

  /// Inserts a pair (or overwrites the label of an exact re-visit when
  /// dedup is on). Returns the index holding the pair.
  std::size_t insert(const Vec& x, ModeSequence modes, double objective) {
    if (x.size() != weights_.size())
      throw DimensionMismatch("SampleStore::insert: state dimension");
    if (dedup_exact_) {
      if (auto hit = nn_query(x); hit && hit->distance == 0.0) {
        relabel(hit->index, std::move(modes), objective);
        return hit->index;
      }
    }
    samples_.push_back(Sample{x, std::move(modes), objective});
    ++overflow_count_;
    if (overflow_count_ >= kRebuildEvery) rebuild();
    return samples_.size() - 1;
  }

  void relabel(std::size_t i, ModeSequence modes, double objective) {
    samples_.at(i).modes = std::move(modes);
    samples_.at(i).objective = objective;
  }

  /// Exact nearest sample; earliest insertion wins distance ties. Empty
  /// result on an empty store.
  std::optional<NnResult> nn_query(const Vec& x) const {
    if (samples_.empty()) return std::nullopt;
    if (x.size() != weights_.size())
      throw DimensionMismatch("SampleStore::nn_query: state dimension");
    double best_d2 = std::numeric_limits<double>::infinity();
    std::size_t best = 0;
    bool found = false;
    if (!nodes_.empty()) search(0, x, best_d2, best, found);
    const std::size_t tree_points = samples_.size() - overflow_count_;
    for (std::size_t i = tree_points; i < samples_.size(); ++i)
      consider(i, x, best_d2, best, found);
    NnResult res;
    res.index = best;
    res.distance = std::sqrt(best_d2);
    res.modes = samples_[best].modes;
    return res;
  }

  /// Forces an index rebuild folding the overflow list into the tree.
  void rebuild() {
    overflow_count_ = 0;
    nodes_.clear();
    if (samples_.empty()) return;
    std::vector<std::size_t> idx(samples_.size());
    for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
    nodes_.reserve(samples_.size());
    build(idx, 0, idx.size());
  }

  /// One JSON object per line: {"x": [..], "modes": [..], "objective": f}.
  void save_jsonl(std::ostream& os) const {
    for (const Sample& s : samples_) {
      nlohmann::json j{{"x", detail::vector_to_array(s.x)},
                       {"modes", s.modes.entries},
                       {"objective", s.objective}};
      os << j.dump() << "\n";
    }
  }

  void save_jsonl_file(const std::string& path) const {
    std::ofstream os(path);
    if (!os) throw Error("SampleStore: cannot write " + path);
    save_jsonl(os);
  }

  static SampleStore load_jsonl(std::istream& is, Vec weights, bool dedup_exact = true) {
    SampleStore store(std::move(weights), dedup_exact);
    std::string line;
    while (std::getline(is, line)) {
      if (line.empty()) continue;
      nlohmann::json j = nlohmann::json::parse(line);
      ModeSequence m(j.at("modes").get<std::vector<int>>());
      store.insert(detail::array_to_vector(j.at("x")), std::move(m),
                   j.at("objective").get<double>());
    }
    return store;
  }

  static SampleStore load_jsonl_file(const std::string& path, Vec weights,
                                     bool dedup_exact = true) {
    std::ifstream is(path);
    if (!is) throw Error("SampleStore: cannot read " + path);
    return load_jsonl(is, std::move(weights), dedup_exact);
  }

 private:
  static constexpr std::size_t kRebuildEvery = 256;

  struct KdNode {
    std::size_t point = 0;
    int axis = 0;
    double split = 0.0;
    int left = -1;
    int right = -1;
  };

  // Distance terms accumulate in ascending axis order everywhere, so the
  // partial-term pruning bound can never exceed a full distance in floating
  // point and tree queries replicate a linear scan bit for bit.
  double dist2(const Vec& a, const Vec& b) const {
    double s = 0.0;
    for (Index i = 0; i < a.size(); ++i) {
      const double d = a[i] - b[i];
      s += weights_[i] * (d * d);
    }
    return s;
  }

  void consider(std::size_t i, const Vec& x, double& best_d2, std::size_t& best,
                bool& found) const {
    const double d2 = dist2(samples_[i].x, x);
    if (!found || d2 < best_d2 || (d2 == best_d2 && i < best)) {
      best_d2 = d2;
      best = i;
      found = true;
    }
  }

  int build(std::vector<std::size_t>& idx, std::size_t begin, std::size_t end) {
    if (begin >= end) return -1;
    // split along the axis of largest weighted extent
    int axis = 0;
    double best_extent = -1.0;
    for (Index a = 0; a < weights_.size(); ++a) {
      double lo = std::numeric_limits<double>::infinity(), hi = -lo;
      for (std::size_t k = begin; k < end; ++k) {
        const double v = samples_[idx[k]].x[a];
        lo = std::min(lo, v);
        hi = std::max(hi, v);
      }
      const double extent = std::sqrt(weights_[a]) * (hi - lo);
      if (extent > best_extent) {
        best_extent = extent;
        axis = static_cast<int>(a);
      }
    }
    const std::size_t mid = begin + (end - begin) / 2;
    std::nth_element(idx.begin() + static_cast<std::ptrdiff_t>(begin),
                     idx.begin() + static_cast<std::ptrdiff_t>(mid),
                     idx.begin() + static_cast<std::ptrdiff_t>(end),
                     [&](std::size_t a, std::size_t b) {
                       const double va = samples_[a].x[axis];
                       const double vb = samples_[b].x[axis];
                       return va != vb ? va < vb : a < b;
                     });
    const int self = static_cast<int>(nodes_.size());
    nodes_.push_back(KdNode{idx[mid], axis, samples_[idx[mid]].x[axis], -1, -1});
    const int l = build(idx, begin, mid);
    const int r = build(idx, mid + 1, end);
    nodes_[static_cast<std::size_t>(self)].left = l;
    nodes_[static_cast<std::size_t>(self)].right = r;
    return self;
  }

  void search(int node, const Vec& x, double& best_d2, std::size_t& best,
              bool& found) const {
    if (node < 0) return;
    const KdNode& nd = nodes_[static_cast<std::size_t>(node)];
    consider(nd.point, x, best_d2, best, found);
    const double diff = x[nd.axis] - nd.split;
    const int near = diff <= 0.0 ? nd.left : nd.right;
    const int far = diff <= 0.0 ? nd.right : nd.left;
    search(near, x, best_d2, best, found);
    const double gap2 = weights_[nd.axis] * (diff * diff);
    // descend on ties: an equal-distance, lower-index sample may hide there
    if (gap2 <= best_d2) search(far, x, best_d2, best, found);
  }

  Vec weights_;
  bool dedup_exact_ = true;
  std::vector<Sample> samples_;
  std::vector<KdNode> nodes_;
  std::size_t overflow_count_ = 0;
};

}  // namespace lnms
