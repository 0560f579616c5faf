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

#ifndef MICROPACK_SCHEDULE_H_
#define MICROPACK_SCHEDULE_H_

#include <string_view>
#include <vector>

#include "micropack/plan.h"

namespace micropack {

// Recompute and offload are reserved for extensions; the builders below only
// emit forward and backward tasks.
enum class Action { kForward, kBackward, kRecompute, kOffload };

std::string_view to_string(Action action);
Action action_from_string(std::string_view name);

struct TaskRef {
  int stage = 0;
  Action action = Action::kForward;
  // Index into the forward or backward pack stream depending on `action`.
  int pack_index = 0;

  friend bool operator==(const TaskRef&, const TaskRef&) = default;
};

// Ordered task list of every pipeline stage of one DP replica.
struct RankProgram {
  std::vector<std::vector<TaskRef>> stages;

  friend bool operator==(const RankProgram&, const RankProgram&) = default;
};

enum class ScheduleKind { kGPipe, kOneFOneB };

std::string_view to_string(ScheduleKind kind);
ScheduleKind schedule_kind_from_string(std::string_view name);

// For every backward pack k, the highest forward pack index whose forward
// pass must have completed before k can start: the last forward pack of every
// sample touched by k. Throws InvalidInput when the backward stream does not
// visit each sample tail-first.
std::vector<int> backward_readiness(const RankPlan& plan);

// All forwards in FIFO order, then all backwards in stream order.
RankProgram build_gpipe_program(const RankPlan& plan, int pp);

// Stage s warms up with pp - s forwards and then alternates one backward and
// one forward, so that k + pp - s forwards precede backward k. When backward
// k needs more, the last stage issues backward_readiness(k) + 1 forwards and
// stage s another pp - 1 - s on top, injected from the FIFO stream. Later
// backwards run without interleaved forwards until the plain depth is back.
RankProgram build_1f1b_program(const RankPlan& plan, int pp);

RankProgram build_program(const RankPlan& plan, int pp, ScheduleKind kind);

// Throws InvalidInput on missing or duplicate tasks, non-FIFO forwards, or a
// dependency cycle (the message names a vertex on the cycle).
void validate_program(const RankProgram& program, const RankPlan& plan, int pp);

struct ProgramStats {
  std::vector<int> warmup_forwards;    // per stage: forwards before first backward
  // Per stage: forwards issued ahead of the plain 1F1B position, summed
  // over backwards.
  std::vector<int> injected_forwards;
};

ProgramStats program_stats(const RankProgram& program, int pp);

}  // namespace micropack

#endif  // MICROPACK_SCHEDULE_H_
