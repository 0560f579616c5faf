// Copyright 2026 The Micropack Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "micropack/errors.h"
#include "micropack/io/config.h"
#include "micropack/io/plan_json.h"
#include "micropack/io/runner.h"
#include "micropack/io/timeline.h"

namespace {

using namespace micropack;
using namespace micropack::io;

constexpr int kExitConfig = 2;
constexpr int kExitInfeasible = 3;
constexpr int kExitInvariant = 4;

struct Overrides {
  std::optional<int> dp;
  std::optional<int> pp;
  std::optional<int> cp_base;
  std::optional<std::int64_t> mem_budget;
  std::optional<std::int64_t> alignment;
  std::optional<int> refinement_passes;
  std::optional<double> outlier_threshold;
  std::optional<int> jobs;
  std::optional<std::string> strategy;
  std::optional<std::string> schedule;
  std::optional<std::uint64_t> seed;
  std::optional<int> count;

  void add_to(CLI::App* app) {
    app->add_option("--dp", dp, "Data-parallel ranks");
    app->add_option("--pp", pp, "Pipeline stages");
    app->add_option("--cp-base", cp_base, "Base context-parallel degree");
    app->add_option("--mem-budget", mem_budget, "Per-stage memory budget in bytes");
    app->add_option("--alignment", alignment, "Slice boundary grid in tokens");
    app->add_option("--refinement-passes", refinement_passes, "Improving moves after the greedy pass");
    app->add_option("--outlier-threshold", outlier_threshold, "DP-Merge trigger as a multiple of capacity");
    app->add_option("--jobs", jobs, "Worker threads");
    app->add_option("--strategy", strategy, "slimpack, best_fit, length or tflops");
    app->add_option("--schedule", schedule, "gpipe or 1f1b");
    app->add_option("--seed", seed, "Synthetic workload seed");
    app->add_option("--count", count, "Synthetic workload sample count");
  }

  void apply(RunConfig& c) const {
    if (dp) c.cluster.dp = *dp;
    if (pp) c.cluster.pp = *pp;
    if (cp_base) c.cluster.cp_base = *cp_base;
    if (mem_budget) c.cluster.mem_budget_bytes = *mem_budget;
    if (alignment) c.solver.alignment = *alignment;
    if (refinement_passes) c.solver.refinement_passes = *refinement_passes;
    if (outlier_threshold) c.solver.outlier_threshold = *outlier_threshold;
    if (jobs) c.solver.jobs = *jobs;
    try {
      if (strategy) c.strategy = strategy_from_string(*strategy);
    } catch (const InvalidInput& e) {
      throw ParseError("--strategy", e.what());
    }
    try {
      if (schedule) c.schedule = schedule_kind_from_string(*schedule);
    } catch (const InvalidInput& e) {
      throw ParseError("--schedule", e.what());
    }
    if (seed) c.workload.seed = *seed;
    if (count) c.workload.count = *count;
    c.validate();
  }
};

struct Loaded {
  RunConfig config;
  std::string base_dir = ".";
};

Loaded load(const std::string& path, const Overrides& o) {
  Loaded l;
  if (!path.empty()) {
    l.config = load_config_file(path);
    l.base_dir = std::filesystem::path(path).parent_path().string();
    if (l.base_dir.empty()) l.base_dir = ".";
  }
  o.apply(l.config);
  return l;
}

void emit(const std::string& path, const std::string& content) {
  if (path.empty() || path == "-") {
    std::cout << content;
    std::cout.flush();
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ParseError(path, "cannot open for writing");
  out << content;
  if (!out) throw ParseError(path, "write failed");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Packing planner and pipeline simulator for variable-length training batches"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_path;
  Overrides overrides;

  auto* plan = app.add_subcommand("plan", "Solve a packing plan and write the plan JSON");
  plan->add_option("-c,--config", config_path, "Config JSON")->required();
  plan->add_option("-o,--out", out_path, "Output path (stdout by default)");
  overrides.add_to(plan);

  std::string plan_path;
  std::string csv_path;
  std::string gantt_path;
  auto* simulate = app.add_subcommand("simulate", "Simulate a plan and write the timeline JSON");
  auto* sim_config = simulate->add_option("-c,--config", config_path, "Config JSON (solved inline)");
  auto* sim_plan = simulate->add_option("-p,--plan", plan_path, "Plan JSON from `plan`");
  sim_config->excludes(sim_plan);
  simulate->add_option("-o,--out", out_path, "Timeline JSON path (stdout by default)");
  simulate->add_option("--csv", csv_path, "Per-vertex CSV path");
  simulate->add_option("--gantt", gantt_path, "Gantt SVG path");
  overrides.add_to(simulate);

  auto* compare = app.add_subcommand("compare", "Run every strategy on the same workload");
  compare->add_option("-c,--config", config_path, "Config JSON")->required();
  compare->add_option("-o,--out", out_path, "Report path (stdout by default)");
  overrides.add_to(compare);

  auto* sweep = app.add_subcommand("sweep", "Report every pack-count candidate of the solver");
  sweep->add_option("-c,--config", config_path, "Config JSON")->required();
  sweep->add_option("-o,--out", out_path, "Report path (stdout by default)");
  overrides.add_to(sweep);

  std::string format = "plain";
  auto* gen = app.add_subcommand("gen-data", "Write a synthetic length manifest");
  gen->add_option("-c,--config", config_path, "Config JSON with a synthetic workload section");
  gen->add_option("-o,--out", out_path, "Manifest path (stdout by default)");
  gen->add_option("--format", format, "plain or jsonl");
  overrides.add_to(gen);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitConfig;
  }

  try {
    if (plan->parsed()) {
      const auto l = load(config_path, overrides);
      const auto batch = load_workload(l.config, l.base_dir);
      emit(out_path, dump(plan_to_json(run_strategy(l.config, batch).doc)));
    } else if (simulate->parsed()) {
      PlanDocument doc;
      if (!plan_path.empty()) {
        doc = load_plan_file(plan_path);
        if (overrides.jobs) doc.config.solver.jobs = *overrides.jobs;
        if (overrides.schedule) {
          try {
            doc.config.schedule = schedule_kind_from_string(*overrides.schedule);
          } catch (const InvalidInput& e) {
            throw ParseError("--schedule", e.what());
          }
        }
      } else if (!config_path.empty()) {
        const auto l = load(config_path, overrides);
        doc = run_strategy(l.config, load_workload(l.config, l.base_dir)).doc;
      } else {
        throw ParseError("simulate", "give --config or --plan");
      }
      const auto sim = simulate_document(doc);
      emit(out_path, dump(timeline_to_json(sim, doc.config.schedule)));
      if (!csv_path.empty()) emit(csv_path, vertex_csv(sim));
      if (!gantt_path.empty()) emit(gantt_path, gantt_svg(sim, doc.config.gantt_px_per_second));
    } else if (compare->parsed()) {
      const auto l = load(config_path, overrides);
      emit(out_path, dump(compare_report(l.config, load_workload(l.config, l.base_dir))));
    } else if (sweep->parsed()) {
      const auto l = load(config_path, overrides);
      emit(out_path, dump(sweep_report(l.config, load_workload(l.config, l.base_dir))));
    } else if (gen->parsed()) {
      const auto l = load(config_path, overrides);
      ManifestFormat fmt;
      try {
        fmt = manifest_format_from_string(format);
      } catch (const InvalidInput& e) {
        throw ParseError("--format", e.what());
      }
      const auto& w = l.config.workload;
      const auto batch = generate_synthetic(w.spec, w.seed, w.count);
      std::ostringstream text;
      write_lengths(text, batch, fmt);
      emit(out_path, text.str());
    }
  } catch (const ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const InvalidInput& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const Infeasible& e) {
    std::cerr << "infeasible: " << e.what() << "\n";
    return kExitInfeasible;
  } catch (const InvariantViolation& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return kExitInvariant;
  }
  return 0;
}
