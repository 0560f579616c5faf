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

#ifndef MICROPACK_DAGSIM_H_
#define MICROPACK_DAGSIM_H_

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "micropack/cost_model.h"
#include "micropack/errors.h"
#include "micropack/plan.h"
#include "micropack/schedule.h"

namespace micropack {

struct DataId {
  int pack_index = 0;
  // Set for Slim packs: ordinal of the slice within its sample.
  std::optional<int> slice_index;

  friend bool operator==(const DataId&, const DataId&) = default;
};

// One task: (model_id = pipeline stage, action, data_id) plus its duration.
struct Vertex {
  int stage = 0;
  Action action = Action::kForward;
  DataId data;
  double weight = 0.0;
};

std::string describe(const Vertex& v);

enum class EdgeKind { kInterStage, kInterSlice, kSchedule };

std::string_view to_string(EdgeKind kind);

struct Edge {
  int from = 0;
  int to = 0;
  EdgeKind kind = EdgeKind::kSchedule;
};

struct Dag {
  std::vector<Vertex> vertices;
  std::vector<Edge> edges;
};

class CycleError : public InvalidInput {
 public:
  explicit CycleError(std::vector<int> cycle);
  const std::vector<int>& cycle() const { return cycle_; }

 private:
  std::vector<int> cycle_;
};

struct Timeline {
  std::vector<double> start;
  std::vector<double> finish;
  double t_total = 0.0;
};

enum class MemoryReason { kStatic, kActivationAlloc, kActivationFree, kKvAlloc, kKvFree };

std::string_view to_string(MemoryReason reason);

struct MemoryEvent {
  double time = 0.0;
  std::int64_t delta_bytes = 0;
  MemoryReason reason = MemoryReason::kStatic;
  int vertex = -1;  // -1 for static memory
};

struct StageMemory {
  std::vector<MemoryEvent> events;  // chronological
  std::int64_t peak_bytes = 0;
};

struct MemoryTrace {
  std::vector<StageMemory> stages;

  std::int64_t peak_bytes() const;
};

struct StageMetrics {
  double busy = 0.0;
  double idle = 0.0;
  double bubble_fraction = 0.0;
};

struct Metrics {
  std::vector<StageMetrics> stages;
  double t_total = 0.0;
  double tokens_per_second = 0.0;
  std::vector<int> critical_path;
};

// Layers held by each stage: an even split, with the remainder assigned to
// the leading stages.
std::vector<std::int64_t> layers_per_stage(const ModelShape& model, int pp);

// Vertices and edges without weights. Forward vertices follow the forward
// pack stream and backward vertices the backward stream. Edges:
//  - inter-stage: F(s) -> F(s+1) per forward pack, B(s+1) -> B(s) per
//    backward pack, and on the last stage F(j) -> B(k) whenever forward pack j
//    and backward pack k share tokens;
//  - inter-slice: F(j) -> F(j') for consecutive forward slices of a sample,
//    B(k) -> B(k') for consecutive backward slices (tail first), per stage;
//  - schedule: consecutive tasks of each stage's program.
// A vertex pair gets one edge; data edges take precedence over schedule
// edges. Throws InvalidInput when the program does not match the plan.
Dag build_dag_structure(const RankPlan& plan, const RankProgram& program, int pp);

// build_dag_structure with weights: a pack's cost in seconds scaled by the
// fraction of layers on the stage.
Dag build_dag(const RankPlan& plan, const RankProgram& program, const ModelShape& model,
              const HardwareProfile& hw, int pp);

// Kahn's algorithm, smallest vertex id first. Throws CycleError.
std::vector<int> topo_sort(const Dag& dag);

// Start(v) = max({0} U {Finish(u) | (u, v) in E}), Finish(v) = Start(v) + w(v)
// in one pass over the topological order.
Timeline compute_timeline(const Dag& dag);

// From the max-finish vertex back through predecessors whose finish equals the
// current start, smallest id on ties. Returned source first.
std::vector<int> critical_path(const Dag& dag, const Timeline& tl);

// Per stage: static bytes at t = 0; activation and KV bytes of each forward
// slice allocated when its forward vertex finishes and freed when the
// backward vertex holding the same tokens finishes. Equal timestamps process
// allocations before frees.
MemoryTrace memory_trace(const RankPlan& plan, const Dag& dag, const Timeline& tl,
                         const ModelShape& model, const HardwareProfile& hw, int pp);

Metrics compute_metrics(const Dag& dag, const Timeline& tl, int pp, TokenCount tokens);

}  // namespace micropack

#endif  // MICROPACK_DAGSIM_H_
