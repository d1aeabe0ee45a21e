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

#include <chrono>
#include <cstdio>
#include <optional>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include "lnms/bnb.hpp"
#include "lnms/errors.hpp"
#include "lnms/hybrid_ocp.hpp"
#include "lnms/log.hpp"
#include "lnms/sample_store.hpp"
#include "lnms/types.hpp"

namespace lnms {

/// Aggregate counters of the online controller. Every control step is
/// either a pure QP step (cached sequence was feasible) or a MIP step.
struct LnmsStats {
  struct StepRecord {
    bool mip_invoked = false;
    bool warm_start_feasible = false;  ///< cached NN sequence was feasible
    double solve_time = 0.0;
    double objective = 0.0;
  };

  long steps = 0;
  long mip_invocations = 0;
  long qp_only_steps = 0;
  std::vector<StepRecord> records;

  void add(const StepRecord& r) {
    ++steps;
    if (r.mip_invoked)
      ++mip_invocations;
    else
      ++qp_only_steps;
    records.push_back(r);
  }
};

struct ControlStepResult {
  Vec u0;
  ModeSequence modes;   ///< sequence the applied input came from
  double objective = 0.0;
  LnmsStats::StepRecord record;
  std::size_t store_index = 0;
};

/**
 * @brief Online controller caching mode sequences by nearest neighbor.
 *
 * Each step queries the store for the nearest stored state's sequence,
 * solves the corresponding fixed-mode QP, and falls back to warm-started
 * branch and bound only when that QP is infeasible (or the store is
 * empty). The visited (state, sequence) pair is added to the store either
 * way, so the region cover refines online.
 *
 * The controller owns mutable state (store, stats); use one instance per
 * thread or synchronize externally.
 */
class LnmsController {
 public:
  LnmsController(HybridOcp ocp, Vec nn_weights, BnbConfig solver_config = {},
                 bool dedup_exact = true)
      : ocp_(std::move(ocp)),
        store_(std::move(nn_weights), dedup_exact),
        config_(std::move(solver_config)) {
    ocp_.validate();
    if (store_.weights().size() != ocp_.system.n_x)
      throw DimensionMismatch("LnmsController: weight vector dimension");
  }

  LnmsController(HybridOcp ocp, SampleStore store, BnbConfig solver_config = {})
      : ocp_(std::move(ocp)), store_(std::move(store)), config_(std::move(solver_config)) {
    ocp_.validate();
    if (store_.weights().size() != ocp_.system.n_x)
      throw DimensionMismatch("LnmsController: store dimension");
  }

  const HybridOcp& ocp() const { return ocp_; }
  SampleStore& store() { return store_; }
  const SampleStore& store() const { return store_; }
  LnmsStats& stats() { return stats_; }
  const LnmsStats& stats() const { return stats_; }
  const BnbConfig& config() const { return config_; }

  ControlStepResult control_step(const Vec& x_p) { return control_step(x_p, config_); }

  ControlStepResult control_step(const Vec& x_p, const BnbConfig& config) {
    if (!x_p.allFinite())
      throw InvalidParameter("control_step: non-finite state");
    const auto t0 = std::chrono::steady_clock::now();
    auto elapsed = [&] {
      return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
          .count();
    };

    ControlStepResult out;
    const auto nn = store_.nn_query(x_p);
    if (nn) {
      const DenseQp qp = assemble_fixed_mode_ocp(ocp_, nn->modes, x_p);
      QpSolution sol = solve_qp(qp, config.qp);
      if (sol.status == QpStatus::Optimal) {
        out.u0 = sol.z.head(ocp_.system.n_u);
        out.modes = nn->modes;
        out.objective = sol.objective;
        out.record = {false, true, elapsed(), sol.objective};
        out.store_index = store_.insert(x_p, nn->modes, sol.objective);
        stats_.add(out.record);
        return out;
      }
    }

    MiqpSolution mip = solve_bnb(ocp_, x_p,
                                 nn ? std::optional<ModeSequence>(nn->modes)
                                    : std::nullopt,
                                 config);
    if (!mip.feasible_found())
      throw InfeasibleProblem("control_step: no feasible mode sequence at state");
    out.u0 = mip.u.col(0);
    out.modes = mip.modes;
    out.objective = mip.objective;
    out.record = {true, false, elapsed(), mip.objective};
    out.store_index = store_.insert(x_p, mip.modes, mip.objective);
    stats_.add(out.record);
    return out;
  }

 private:
  HybridOcp ocp_;
  SampleStore store_;
  BnbConfig config_;
  LnmsStats stats_;
};

struct ImprovementEntry {
  std::size_t index = 0;
  double old_objective = 0.0;
  double new_objective = 0.0;
  bool changed = false;
  bool skipped = false;  ///< stored sequence was infeasible at its state
};

struct ImprovementReport {
  std::vector<ImprovementEntry> entries;
  long changed_count = 0;
  long skipped_count = 0;

  /// CSV with columns index,old_obj,new_obj,changed. Skipped samples keep
  /// NaN objectives and changed = 0.
  void write_csv(std::ostream& os) const {
    os << "index,old_obj,new_obj,changed\n";
    char buf[128];
    for (const auto& e : entries) {
      std::snprintf(buf, sizeof(buf), "%zu,%.17g,%.17g,%d\n", e.index,
                    e.old_objective, e.new_objective, e.changed ? 1 : 0);
      os << buf;
    }
  }
};

/**
 * @brief Offline relabeling pass: re-solves each stored sample with its
 * sequence as warm start and keeps the (never worse) result.
 *
 * The warm start seeds the incumbent, so the relabeled fixed-mode cost can
 * only stay or drop; a nullopt budget runs every solve to full optimality.
 * Samples whose stored sequence is no longer feasible are skipped and
 * logged rather than fatal.
 */
inline ImprovementReport improve_samples(SampleStore& store, const HybridOcp& ocp,
                                         std::optional<double> budget_per_sample,
                                         const std::vector<std::size_t>* subset = nullptr,
                                         const BnbConfig& base_config = {}) {
  ImprovementReport report;
  std::vector<std::size_t> all;
  if (!subset) {
    all.resize(store.size());
    for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
  }
  const std::vector<std::size_t>& indices = subset ? *subset : all;

  for (std::size_t i : indices) {
    const Sample& s = store.sample(i);
    ImprovementEntry entry;
    entry.index = i;
    const DenseQp qp = assemble_fixed_mode_ocp(ocp, s.modes, s.x);
    const QpSolution old_sol = solve_qp(qp, base_config.qp);
    if (old_sol.status != QpStatus::Optimal) {
      entry.skipped = true;
      entry.old_objective = std::numeric_limits<double>::quiet_NaN();
      entry.new_objective = entry.old_objective;
      ++report.skipped_count;
      report.entries.push_back(entry);
      log_info("improve_samples: skipped infeasible sample " + std::to_string(i));
      continue;
    }
    entry.old_objective = old_sol.objective;

    BnbConfig cfg = base_config;
    cfg.time_limit = budget_per_sample;
    cfg.stop_at_first_feasible = false;
    const MiqpSolution res = solve_bnb(ocp, s.x, s.modes, cfg);
    if (res.feasible_found()) {
      entry.new_objective = res.objective;
      entry.changed = !(res.modes == s.modes);
      store.relabel(i, res.modes, res.objective);
    } else {
      entry.new_objective = entry.old_objective;  // keep the old label
    }
    if (entry.changed) ++report.changed_count;
    report.entries.push_back(entry);
  }
  return report;
}

}  // namespace lnms
