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

#ifndef MICROPACK_SIMULATE_H_
#define MICROPACK_SIMULATE_H_

#include <cstdint>
#include <functional>
#include <vector>

#include "micropack/dagsim.h"
#include "micropack/plan.h"
#include "micropack/schedule.h"

namespace micropack {

struct RankSimulation {
  int rank = 0;
  RankProgram program;
  Dag dag;
  Timeline timeline;
  MemoryTrace memory;
  Metrics metrics;
};

struct PlanSimulation {
  std::vector<RankSimulation> ranks;
  // Replicas synchronize at gradient reduction: the step ends with the
  // slowest one.
  double t_total = 0.0;
  double tokens_per_second = 0.0;
  std::int64_t peak_bytes = 0;
};

TokenCount rank_tokens(const RankPlan& plan);

// Program, DAG, timeline, memory and metrics of one replica. The program is
// validated before simulation.
RankSimulation simulate_rank(const RankPlan& plan, const ModelShape& model,
                             const HardwareProfile& hw, int pp, ScheduleKind kind);

PlanSimulation simulate_plan(const PackPlan& plan, const ModelShape& model,
                             const HardwareProfile& hw, int pp, ScheduleKind kind, int jobs = 1);

// Runs fn(0) .. fn(n - 1) on up to `jobs` threads. fn must only write to
// slots owned by its index.
void parallel_for(int n, int jobs, const std::function<void(int)>& fn);

}  // namespace micropack

#endif  // MICROPACK_SIMULATE_H_
