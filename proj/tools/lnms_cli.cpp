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

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "lnms/lnms.hpp"
#include "lnms/log.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitRuntime = 1;
constexpr int kExitUsage = 2;

struct CliOptions {
  std::string config_path;
  std::string out_dir;
  std::optional<std::uint64_t> seed;
  bool strip_timing = false;

  // per-command extras
  std::optional<int> rollouts;
  std::string store_path;
  std::optional<double> budget;
  std::string which;
  std::optional<int> n_ocps;
  std::optional<int> resolution;
};

json load_config(const CliOptions& opt) {
  json cfg = json::object();
  if (!opt.config_path.empty()) {
    std::ifstream is(opt.config_path);
    if (!is) throw lnms::InvalidParameter("config not found: " + opt.config_path);
    is >> cfg;
  }
  // flag overrides
  if (!opt.out_dir.empty()) cfg["out_dir"] = opt.out_dir;
  if (!cfg.contains("out_dir")) cfg["out_dir"] = "out";
  if (!cfg.contains("experiment")) cfg["experiment"] = json::object();
  if (opt.seed) cfg["experiment"]["seed"] = *opt.seed;
  if (opt.rollouts) cfg["experiment"]["rollouts"] = *opt.rollouts;
  if (opt.n_ocps) cfg["experiment"]["n_ocps"] = *opt.n_ocps;
  if (opt.resolution) cfg["experiment"]["resolution"] = *opt.resolution;
  if (opt.budget) cfg["experiment"]["improve_budget_s"] = *opt.budget;
  if (!opt.store_path.empty()) cfg["store"] = opt.store_path;
  cfg["strip_timing"] = opt.strip_timing;
  if (!cfg.contains("environment")) cfg["environment"] = "cart1";
  return cfg;
}

lnms::BnbConfig solver_config(const json& cfg) {
  lnms::BnbConfig out;
  if (!cfg.contains("solver")) return out;
  const json& s = cfg.at("solver");
  if (s.contains("time_limit_s") && !s.at("time_limit_s").is_null())
    out.time_limit = s.at("time_limit_s").get<double>();
  if (s.contains("gap_tol")) out.gap_tol = s.at("gap_tol").get<double>();
  if (s.contains("stop_at_first_feasible"))
    out.stop_at_first_feasible = s.at("stop_at_first_feasible").get<bool>();
  if (s.contains("node_limit") && !s.at("node_limit").is_null())
    out.node_limit = s.at("node_limit").get<long>();
  return out;
}

lnms::BenchProblem problem_from_config(const json& cfg) {
  const auto id = lnms::parse_environment(cfg.at("environment").get<std::string>());
  return lnms::make_bench_problem(
      id, cfg.contains("overrides") ? cfg.at("overrides") : json::object());
}

template <typename T>
T experiment_value(const json& cfg, const std::string& key, T fallback) {
  if (cfg.contains("experiment") && cfg.at("experiment").contains(key))
    return cfg.at("experiment").at(key).get<T>();
  return fallback;
}

fs::path prepare_out_dir(const json& cfg) {
  const fs::path dir(cfg.at("out_dir").get<std::string>());
  fs::create_directories(dir);
  std::ofstream os(dir / "config.json");
  os << cfg.dump(2) << "\n";
  return dir;
}

bool store_dedup(const json& cfg) {
  if (cfg.contains("lnms") && cfg.at("lnms").contains("dedup"))
    return cfg.at("lnms").at("dedup").get<bool>();
  return true;
}

int cmd_run(const json& cfg) {
  const lnms::BenchProblem problem = problem_from_config(cfg);
  const lnms::BnbConfig solver = solver_config(cfg);
  const bool strip = cfg.at("strip_timing").get<bool>();
  const fs::path dir = prepare_out_dir(cfg);

  lnms::SampleStore store(problem.nn_weights, store_dedup(cfg));
  if (cfg.contains("lnms") && cfg.at("lnms").contains("seed_store")) {
    const std::string path = cfg.at("lnms").at("seed_store").get<std::string>();
    store = lnms::SampleStore::load_jsonl_file(path, problem.nn_weights,
                                               store_dedup(cfg));
    lnms::log_info("seeded store with " + std::to_string(store.size()) + " samples");
  }
  lnms::LnmsController controller(problem.ocp, std::move(store), solver);

  const int rollouts = experiment_value(cfg, "rollouts", 10);
  const int max_steps = experiment_value(cfg, "max_steps", 400);
  const double eps = experiment_value(cfg, "convergence_eps", 0.01);
  lnms::Rng rng(experiment_value<std::uint64_t>(cfg, "seed", 0));

  json summary = json::array();
  for (int r = 0; r < rollouts; ++r) {
    const lnms::Vec x0 = rng.uniform_vec(problem.region_lo, problem.region_hi);
    const lnms::RolloutRecord rec =
        lnms::closed_loop_rollout(controller, x0, max_steps, eps);
    char name[64];
    std::snprintf(name, sizeof(name), "rollout_%03d.json", r);
    std::ofstream os(dir / name);
    os << lnms::rollout_to_json(rec, strip).dump(2) << "\n";
    long mip = 0;
    for (const auto& s : rec.steps) mip += s.mip_invoked ? 1 : 0;
    summary.push_back({{"rollout", r},
                       {"terminated", lnms::to_string(rec.terminated)},
                       {"steps", rec.steps.size()},
                       {"mip_steps", mip}});
    std::cout << "rollout " << r << ": " << lnms::to_string(rec.terminated)
              << " steps=" << rec.steps.size() << " mip=" << mip << "\n";
  }
  controller.store().save_jsonl_file((dir / "store.jsonl").string());
  std::ofstream os(dir / "run_summary.json");
  os << summary.dump(2) << "\n";
  return kExitOk;
}

int cmd_improve(const json& cfg) {
  const lnms::BenchProblem problem = problem_from_config(cfg);
  const lnms::BnbConfig solver = solver_config(cfg);
  const fs::path dir = prepare_out_dir(cfg);
  if (!cfg.contains("store"))
    throw lnms::InvalidParameter("improve: --store path required");
  const std::string store_path = cfg.at("store").get<std::string>();
  lnms::SampleStore store = lnms::SampleStore::load_jsonl_file(
      store_path, problem.nn_weights, store_dedup(cfg));

  std::optional<double> budget;
  if (cfg.contains("experiment") && cfg.at("experiment").contains("improve_budget_s"))
    budget = cfg.at("experiment").at("improve_budget_s").get<double>();

  const lnms::ImprovementReport report =
      lnms::improve_samples(store, problem.ocp, budget, nullptr, solver);
  std::ofstream csv(dir / "improvement.csv");
  report.write_csv(csv);
  store.save_jsonl_file((dir / "store_improved.jsonl").string());
  std::cout << "improved " << report.entries.size() << " samples: changed="
            << report.changed_count << " skipped=" << report.skipped_count << "\n";
  return kExitOk;
}

int cmd_bench(const json& cfg) {
  const lnms::BenchProblem problem = problem_from_config(cfg);
  const lnms::BnbConfig solver = solver_config(cfg);
  const bool strip = cfg.at("strip_timing").get<bool>();
  const fs::path dir = prepare_out_dir(cfg);
  const std::string which = cfg.at("which").get<std::string>();

  if (which == "mip-fraction") {
    lnms::MipFractionParams params;
    params.n_rollouts = experiment_value(cfg, "rollouts", params.n_rollouts);
    params.max_steps = experiment_value(cfg, "max_steps", params.max_steps);
    params.convergence_eps =
        experiment_value(cfg, "convergence_eps", params.convergence_eps);
    params.window = experiment_value(cfg, "window", params.window);
    params.seed = experiment_value<std::uint64_t>(cfg, "seed", 0);
    const lnms::BenchReport rep =
        lnms::run_mip_fraction_experiment(problem, params, solver);
    std::ofstream csv(dir / "mip_fraction.csv");
    lnms::write_fraction_curve_csv(rep, csv);
    std::ofstream js(dir / "bench_report.json");
    js << lnms::bench_report_to_json(rep, strip).dump(2) << "\n";
    std::cout << "mip-fraction: steps=" << rep.total_steps
              << " mip=" << rep.mip_invocations << " first=" << rep.first_window
              << " final=" << rep.final_window << " rho=" << rep.spearman_rho
              << " p=" << rep.spearman_p << "\n";
    return kExitOk;
  }
  if (which == "wallclock") {
    const int n = experiment_value(cfg, "n_ocps", 100);
    const auto seed = experiment_value<std::uint64_t>(cfg, "seed", 0);
    const lnms::WallclockReport rep =
        lnms::run_wallclock_comparison(problem, n, seed, solver, solver);
    std::ofstream js(dir / "wallclock.json");
    js << lnms::wallclock_report_to_json(rep, strip).dump(2) << "\n";
    std::cout << "wallclock: lnms=" << rep.lnms_seconds << "s mip=" << rep.mip_seconds
              << "s ratio=" << rep.speedup_ratio << " mip_calls=" << rep.lnms_mip_calls
              << "\n";
    return kExitOk;
  }
  throw CLI::ValidationError("--which must be mip-fraction or wallclock");
}

int cmd_partition(const json& cfg) {
  const lnms::BenchProblem problem = problem_from_config(cfg);
  const fs::path dir = prepare_out_dir(cfg);
  if (!cfg.contains("store"))
    throw lnms::InvalidParameter("partition: --store path required");
  const lnms::SampleStore store = lnms::SampleStore::load_jsonl_file(
      cfg.at("store").get<std::string>(), problem.nn_weights, store_dedup(cfg));
  const int resolution = experiment_value(cfg, "resolution", 61);
  const bool with_u0 = experiment_value(cfg, "with_u0", true);
  const lnms::PartitionGrid grid = lnms::export_partition_grid(
      store, resolution, problem.region_lo, problem.region_hi,
      with_u0 ? &problem.ocp : nullptr);
  std::ofstream csv(dir / "partition.csv");
  lnms::write_partition_csv(grid, csv);
  std::cout << "partition: " << grid.distinct_regions << " distinct regions over "
            << grid.region_id.size() << " grid points\n";
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"lnms: hybrid MPC with nearest-neighbor mode-sequence caching"};
  app.require_subcommand(1);
  app.fallthrough();

  CliOptions opt;
  app.add_option("--config", opt.config_path, "JSON run configuration");
  app.add_option("--out", opt.out_dir, "output directory (overrides config)");
  app.add_option("--seed", opt.seed, "RNG seed (overrides config)");
  app.add_flag("--strip-timing", opt.strip_timing,
               "zero wall-clock fields in exported files");

  auto* run = app.add_subcommand("run", "closed-loop rollouts, persists the store");
  run->add_option("--rollouts", opt.rollouts, "number of rollouts");

  auto* improve = app.add_subcommand("improve", "relabel a stored dataset");
  improve->add_option("--store", opt.store_path, "sample store (JSON lines)");
  improve->add_option("--budget", opt.budget, "per-sample solver budget in seconds");

  auto* bench = app.add_subcommand("bench", "benchmark experiments");
  bench->add_option("--which", opt.which, "mip-fraction or wallclock")->required();
  bench->add_option("--n", opt.n_ocps, "number of OCPs (wallclock)");

  auto* partition = app.add_subcommand("partition", "NN partition grid export");
  partition->add_option("--store", opt.store_path, "sample store (JSON lines)");
  partition->add_option("--resolution", opt.resolution, "grid resolution per axis");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  json cfg;
  try {
    cfg = load_config(opt);
    if (bench->parsed()) cfg["which"] = opt.which;
  } catch (const std::exception& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitUsage;
  }

  try {
    if (run->parsed()) return cmd_run(cfg);
    if (improve->parsed()) return cmd_improve(cfg);
    if (bench->parsed()) return cmd_bench(cfg);
    if (partition->parsed()) return cmd_partition(cfg);
  } catch (const CLI::ValidationError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const lnms::InvalidParameter& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
  return kExitUsage;
}
