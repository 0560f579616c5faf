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

#ifndef MICROPACK_IO_RUNNER_H_
#define MICROPACK_IO_RUNNER_H_

#include <vector>

#include "micropack/io/config.h"
#include "micropack/io/plan_json.h"
#include "micropack/simulate.h"
#include "micropack/solver.h"

namespace micropack::io {

struct StrategyRun {
  PlanDocument doc;
  // Solver candidates; empty for the sample-packing baselines.
  std::vector<CandidateEvaluation> evaluations;
  // Bins that alone exceed the TFLOPs target.
  int oversized = 0;
};

// Runs config.strategy on `batch`. Throws Infeasible when the strategy
// cannot produce a plan within the memory budget.
StrategyRun run_strategy(const RunConfig& config, const GlobalBatch& batch);

PlanSimulation simulate_document(const PlanDocument& doc);

struct CostStats {
  double min = 0.0;
  double q1 = 0.0;
  double median = 0.0;
  double q3 = 0.0;
  double max = 0.0;
  double cv = 0.0;  // population standard deviation over mean
};

// Quartiles interpolate linearly between order statistics.
CostStats cost_stats(std::vector<double> values);

// Per-pack forward and backward costs pooled over every rank.
std::vector<double> pack_costs(const PackPlan& plan, bool backward);

Json cost_stats_json(const CostStats& s);

// Every strategy on the same batch: t_total, speedup over best_fit and the
// per-pack cost distribution of both streams.
Json compare_report(const RunConfig& config, const GlobalBatch& batch);

// Every (rank, m) candidate of the slicing solver.
Json sweep_report(const RunConfig& config, const GlobalBatch& batch);

}  // namespace micropack::io

#endif  // MICROPACK_IO_RUNNER_H_
