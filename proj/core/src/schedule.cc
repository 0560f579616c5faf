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

#include "micropack/schedule.h"

#include <algorithm>
#include <map>
#include <string>

#include "micropack/dagsim.h"
#include "micropack/errors.h"

namespace micropack {

std::string_view to_string(Action action) {
  switch (action) {
    case Action::kForward:
      return "F";
    case Action::kBackward:
      return "B";
    case Action::kRecompute:
      return "R";
    case Action::kOffload:
      return "O";
  }
  return "?";
}

Action action_from_string(std::string_view name) {
  if (name == "F") return Action::kForward;
  if (name == "B") return Action::kBackward;
  if (name == "R") return Action::kRecompute;
  if (name == "O") return Action::kOffload;
  throw InvalidInput("unknown action '" + std::string(name) + "'");
}

std::string_view to_string(ScheduleKind kind) {
  return kind == ScheduleKind::kGPipe ? "gpipe" : "1f1b";
}

ScheduleKind schedule_kind_from_string(std::string_view name) {
  if (name == "gpipe") return ScheduleKind::kGPipe;
  if (name == "1f1b") return ScheduleKind::kOneFOneB;
  throw InvalidInput("unknown schedule '" + std::string(name) + "'");
}

std::vector<int> backward_readiness(const RankPlan& plan) {
  if (auto err = check_stream(plan.bwd_packs, plan.samples, SliceOrder::kDescending);
      !err.empty()) {
    throw InvalidInput("malformed plan, backward stream: " + err);
  }
  if (auto err = check_stream(plan.fwd_packs, plan.samples, SliceOrder::kAscending);
      !err.empty()) {
    throw InvalidInput("malformed plan, forward stream: " + err);
  }
  std::map<SampleId, int> last_fwd;
  for (const auto& pack : plan.fwd_packs) {
    for (const auto& sl : pack.slices) last_fwd[sl.sample_id] = pack.index;
  }
  std::vector<int> need(plan.bwd_packs.size(), 0);
  for (std::size_t k = 0; k < plan.bwd_packs.size(); ++k) {
    for (const auto& sl : plan.bwd_packs[k].slices) {
      need[k] = std::max(need[k], last_fwd.at(sl.sample_id));
    }
  }
  return need;
}

RankProgram build_gpipe_program(const RankPlan& plan, int pp) {
  if (pp < 1) throw InvalidInput("pp must be >= 1");
  backward_readiness(plan);  // rejects malformed streams
  RankProgram program;
  program.stages.resize(static_cast<std::size_t>(pp));
  for (int s = 0; s < pp; ++s) {
    auto& tasks = program.stages[static_cast<std::size_t>(s)];
    for (int j = 0; j < static_cast<int>(plan.fwd_packs.size()); ++j) {
      tasks.push_back({s, Action::kForward, j});
    }
    for (int k = 0; k < static_cast<int>(plan.bwd_packs.size()); ++k) {
      tasks.push_back({s, Action::kBackward, k});
    }
  }
  return program;
}

RankProgram build_1f1b_program(const RankPlan& plan, int pp) {
  if (pp < 1) throw InvalidInput("pp must be >= 1");
  const std::vector<int> need = backward_readiness(plan);
  const int num_fwd = static_cast<int>(plan.fwd_packs.size());
  const int num_bwd = static_cast<int>(plan.bwd_packs.size());

  RankProgram program;
  program.stages.resize(static_cast<std::size_t>(pp));
  for (int s = 0; s < pp; ++s) {
    auto& tasks = program.stages[static_cast<std::size_t>(s)];
    int issued = 0;
    for (int k = 0; k < num_bwd; ++k) {
      // Stage s runs pp - 1 - s forwards ahead of the last stage, as in the
      // plain fill, so readiness shifts the whole pipeline.
      // Once the extra forwards are no longer needed, backwards run back to
      // back until the plain in-flight depth is restored.
      const int depth = pp - 1 - s;
      const int target = std::min(num_fwd, std::max({issued, k + pp - s, need[k] + 1 + depth}));
      while (issued < target) tasks.push_back({s, Action::kForward, issued++});
      tasks.push_back({s, Action::kBackward, k});
    }
    while (issued < num_fwd) tasks.push_back({s, Action::kForward, issued++});
  }
  return program;
}

RankProgram build_program(const RankPlan& plan, int pp, ScheduleKind kind) {
  return kind == ScheduleKind::kGPipe ? build_gpipe_program(plan, pp)
                                      : build_1f1b_program(plan, pp);
}

void validate_program(const RankProgram& program, const RankPlan& plan, int pp) {
  if (static_cast<int>(program.stages.size()) != pp) {
    throw InvalidInput("program has " + std::to_string(program.stages.size()) +
                       " stages, expected " + std::to_string(pp));
  }
  const auto num_fwd = plan.fwd_packs.size();
  const auto num_bwd = plan.bwd_packs.size();
  for (int s = 0; s < pp; ++s) {
    std::vector<int> fwd_seen(num_fwd, 0);
    std::vector<int> bwd_seen(num_bwd, 0);
    int last_fwd = -1;
    for (const auto& t : program.stages[static_cast<std::size_t>(s)]) {
      const std::string where = "stage " + std::to_string(s) + " task " +
                                std::string(to_string(t.action)) + std::to_string(t.pack_index);
      if (t.stage != s) throw InvalidInput(where + ": stage field mismatch");
      if (t.action == Action::kForward) {
        if (t.pack_index < 0 || static_cast<std::size_t>(t.pack_index) >= num_fwd) {
          throw InvalidInput(where + ": forward pack out of range");
        }
        if (t.pack_index < last_fwd) throw InvalidInput(where + ": forwards not in FIFO order");
        last_fwd = t.pack_index;
        ++fwd_seen[static_cast<std::size_t>(t.pack_index)];
      } else if (t.action == Action::kBackward) {
        if (t.pack_index < 0 || static_cast<std::size_t>(t.pack_index) >= num_bwd) {
          throw InvalidInput(where + ": backward pack out of range");
        }
        ++bwd_seen[static_cast<std::size_t>(t.pack_index)];
      } else {
        throw InvalidInput(where + ": unsupported action");
      }
    }
    for (std::size_t j = 0; j < num_fwd; ++j) {
      if (fwd_seen[j] != 1) {
        throw InvalidInput("stage " + std::to_string(s) + ": forward pack " + std::to_string(j) +
                           " appears " + std::to_string(fwd_seen[j]) + " times");
      }
    }
    for (std::size_t k = 0; k < num_bwd; ++k) {
      if (bwd_seen[k] != 1) {
        throw InvalidInput("stage " + std::to_string(s) + ": backward pack " + std::to_string(k) +
                           " appears " + std::to_string(bwd_seen[k]) + " times");
      }
    }
  }
  const Dag dag = build_dag_structure(plan, program, pp);
  try {
    topo_sort(dag);
  } catch (const CycleError& e) {
    const Vertex& v = dag.vertices.at(static_cast<std::size_t>(e.cycle().front()));
    throw InvalidInput("dependency cycle through " + describe(v));
  }
}

ProgramStats program_stats(const RankProgram& program, int pp) {
  ProgramStats stats;
  for (int s = 0; s < static_cast<int>(program.stages.size()); ++s) {
    const auto& tasks = program.stages[static_cast<std::size_t>(s)];
    const int num_fwd = static_cast<int>(
        std::count_if(tasks.begin(), tasks.end(),
                      [](const TaskRef& t) { return t.action == Action::kForward; }));
    int forwards = 0;
    int previous = 0;
    int backwards = 0;
    int warmup = -1;
    int injected = 0;
    for (const auto& t : tasks) {
      if (t.action == Action::kForward) {
        ++forwards;
        continue;
      }
      if (t.action != Action::kBackward) continue;
      const int plain = std::min(num_fwd, backwards + pp - s);
      injected += std::max(0, forwards - std::max(previous, plain));
      if (warmup < 0) warmup = forwards;
      previous = std::max(previous, std::max(forwards, plain));
      ++backwards;
    }
    stats.warmup_forwards.push_back(std::max(warmup, 0));
    stats.injected_forwards.push_back(injected);
  }
  return stats;
}

}  // namespace micropack
