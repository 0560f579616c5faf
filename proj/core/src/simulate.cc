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

#include "micropack/simulate.h"

#include <algorithm>
#include <atomic>
#include <exception>
#include <thread>

namespace micropack {

TokenCount rank_tokens(const RankPlan& plan) {
  TokenCount n = 0;
  for (const auto& s : plan.samples) n += s.length;
  return n;
}

RankSimulation simulate_rank(const RankPlan& plan, const ModelShape& model,
                             const HardwareProfile& hw, int pp, ScheduleKind kind) {
  RankSimulation sim;
  sim.rank = plan.rank;
  sim.program = build_program(plan, pp, kind);
  validate_program(sim.program, plan, pp);
  sim.dag = build_dag(plan, sim.program, model, hw, pp);
  sim.timeline = compute_timeline(sim.dag);
  sim.memory = memory_trace(plan, sim.dag, sim.timeline, model, hw, pp);
  sim.metrics = compute_metrics(sim.dag, sim.timeline, pp, rank_tokens(plan));
  return sim;
}

PlanSimulation simulate_plan(const PackPlan& plan, const ModelShape& model,
                             const HardwareProfile& hw, int pp, ScheduleKind kind, int jobs) {
  PlanSimulation out;
  out.ranks.resize(plan.ranks.size());
  parallel_for(static_cast<int>(plan.ranks.size()), jobs, [&](int r) {
    out.ranks[static_cast<std::size_t>(r)] =
        simulate_rank(plan.ranks[static_cast<std::size_t>(r)], model, hw, pp, kind);
  });
  for (const auto& r : out.ranks) {
    out.t_total = std::max(out.t_total, r.timeline.t_total);
    out.peak_bytes = std::max(out.peak_bytes, r.memory.peak_bytes());
  }
  out.tokens_per_second =
      out.t_total > 0.0 ? static_cast<double>(plan.total_tokens()) / out.t_total : 0.0;
  return out;
}

void parallel_for(int n, int jobs, const std::function<void(int)>& fn) {
  const int workers = std::max(1, std::min(jobs, n));
  if (workers == 1) {
    for (int i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<int> next{0};
  std::vector<std::exception_ptr> errors(static_cast<std::size_t>(n));
  std::vector<std::thread> threads;
  threads.reserve(static_cast<std::size_t>(workers));
  for (int w = 0; w < workers; ++w) {
    threads.emplace_back([&] {
      for (int i = next++; i < n; i = next++) {
        try {
          fn(i);
        } catch (...) {
          errors[static_cast<std::size_t>(i)] = std::current_exception();
        }
      }
    });
  }
  for (auto& t : threads) t.join();
  // Same error as a sequential run would raise first.
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

}  // namespace micropack
