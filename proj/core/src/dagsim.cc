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

#include "micropack/dagsim.h"

#include <algorithm>
#include <functional>
#include <map>
#include <queue>
#include <set>
#include <sstream>

namespace micropack {
namespace {

struct VertexIds {
  int num_fwd = 0;
  int num_bwd = 0;

  int forward(int stage, int pack) const { return stage * (num_fwd + num_bwd) + pack; }
  int backward(int stage, int pack) const {
    return stage * (num_fwd + num_bwd) + num_fwd + pack;
  }
};

std::string cycle_message(const std::vector<int>& cycle) {
  std::ostringstream os;
  os << "dependency cycle among vertices";
  for (int v : cycle) os << ' ' << v;
  return os.str();
}

// Ordinal of each slice within its sample, set only for Slim packs.
std::vector<std::optional<int>> slim_slice_ordinals(const std::vector<MicroPack>& packs) {
  std::map<SampleId, int> seen;
  std::vector<std::optional<int>> out(packs.size());
  for (std::size_t p = 0; p < packs.size(); ++p) {
    for (const auto& sl : packs[p].slices) {
      const int ordinal = seen[sl.sample_id]++;
      if (packs[p].state == PackState::kSlim) out[p] = ordinal;
    }
  }
  return out;
}

// Per sample, the packs holding its slices in stream order.
std::map<SampleId, std::vector<int>> packs_by_sample(const std::vector<MicroPack>& packs) {
  std::map<SampleId, std::vector<int>> out;
  for (const auto& pack : packs) {
    for (const auto& sl : pack.slices) out[sl.sample_id].push_back(pack.index);
  }
  return out;
}

}  // namespace

std::string describe(const Vertex& v) {
  std::ostringstream os;
  os << '(' << v.stage << ", " << to_string(v.action) << ", ";
  if (v.data.slice_index) {
    os << '(' << v.data.pack_index << ", " << *v.data.slice_index << ')';
  } else {
    os << v.data.pack_index;
  }
  os << ')';
  return os.str();
}

std::string_view to_string(EdgeKind kind) {
  switch (kind) {
    case EdgeKind::kInterStage:
      return "inter_stage";
    case EdgeKind::kInterSlice:
      return "inter_slice";
    case EdgeKind::kSchedule:
      return "schedule";
  }
  return "?";
}

std::string_view to_string(MemoryReason reason) {
  switch (reason) {
    case MemoryReason::kStatic:
      return "static";
    case MemoryReason::kActivationAlloc:
      return "activation_alloc";
    case MemoryReason::kActivationFree:
      return "activation_free";
    case MemoryReason::kKvAlloc:
      return "kv_alloc";
    case MemoryReason::kKvFree:
      return "kv_free";
  }
  return "?";
}

CycleError::CycleError(std::vector<int> cycle)
    : InvalidInput(cycle_message(cycle)), cycle_(std::move(cycle)) {}

std::int64_t MemoryTrace::peak_bytes() const {
  std::int64_t peak = 0;
  for (const auto& s : stages) peak = std::max(peak, s.peak_bytes);
  return peak;
}

std::vector<std::int64_t> layers_per_stage(const ModelShape& model, int pp) {
  if (pp < 1) throw InvalidInput("pp must be >= 1");
  std::vector<std::int64_t> layers(static_cast<std::size_t>(pp), model.num_layers / pp);
  for (std::int64_t s = 0; s < model.num_layers % pp; ++s) ++layers[static_cast<std::size_t>(s)];
  return layers;
}

Dag build_dag_structure(const RankPlan& plan, const RankProgram& program, int pp) {
  const VertexIds ids{static_cast<int>(plan.fwd_packs.size()),
                      static_cast<int>(plan.bwd_packs.size())};
  if (static_cast<int>(program.stages.size()) != pp) {
    throw InvalidInput("program/plan mismatch: program has " +
                       std::to_string(program.stages.size()) + " stages, pp = " +
                       std::to_string(pp));
  }
  for (std::size_t s = 0; s < program.stages.size(); ++s) {
    const auto& tasks = program.stages[s];
    if (static_cast<int>(tasks.size()) != ids.num_fwd + ids.num_bwd) {
      throw InvalidInput("program/plan mismatch: stage " + std::to_string(s) + " has " +
                         std::to_string(tasks.size()) + " tasks for " +
                         std::to_string(ids.num_fwd + ids.num_bwd) + " vertices");
    }
    for (const auto& t : tasks) {
      const int n = t.action == Action::kForward ? ids.num_fwd : ids.num_bwd;
      if (t.pack_index < 0 || t.pack_index >= n) {
        throw InvalidInput("program/plan mismatch: stage " + std::to_string(s) +
                           " names pack " + std::to_string(t.pack_index) + " out of range");
      }
    }
  }

  Dag dag;
  const auto fwd_slice = slim_slice_ordinals(plan.fwd_packs);
  const auto bwd_slice = slim_slice_ordinals(plan.bwd_packs);
  dag.vertices.reserve(static_cast<std::size_t>(pp * (ids.num_fwd + ids.num_bwd)));
  for (int s = 0; s < pp; ++s) {
    for (int j = 0; j < ids.num_fwd; ++j) {
      dag.vertices.push_back({s, Action::kForward, {j, fwd_slice[static_cast<std::size_t>(j)]}, 0});
    }
    for (int k = 0; k < ids.num_bwd; ++k) {
      dag.vertices.push_back(
          {s, Action::kBackward, {k, bwd_slice[static_cast<std::size_t>(k)]}, 0});
    }
  }

  // One edge per vertex pair; data edges are added first and keep their kind.
  std::set<std::pair<int, int>> seen;
  auto add = [&](int from, int to, EdgeKind kind) {
    if (seen.emplace(from, to).second) dag.edges.push_back({from, to, kind});
  };

  for (int j = 0; j < ids.num_fwd; ++j) {
    for (int s = 0; s + 1 < pp; ++s) add(ids.forward(s, j), ids.forward(s + 1, j), EdgeKind::kInterStage);
  }
  for (int k = 0; k < ids.num_bwd; ++k) {
    for (int s = pp - 1; s > 0; --s) add(ids.backward(s, k), ids.backward(s - 1, k), EdgeKind::kInterStage);
  }

  // Last-stage turn: backward pack k waits for every forward pack sharing
  // tokens with it.
  struct Span {
    TokenCount start;
    TokenCount end;
    int pack;
  };
  std::map<SampleId, std::vector<Span>> fwd_spans;
  for (const auto& pack : plan.fwd_packs) {
    for (const auto& sl : pack.slices) fwd_spans[sl.sample_id].push_back({sl.start, sl.end, pack.index});
  }
  for (auto& [id, spans] : fwd_spans) {
    std::sort(spans.begin(), spans.end(),
              [](const Span& a, const Span& b) { return a.start < b.start; });
  }
  const int last = pp - 1;
  for (const auto& pack : plan.bwd_packs) {
    for (const auto& sl : pack.slices) {
      auto it = fwd_spans.find(sl.sample_id);
      if (it == fwd_spans.end()) {
        throw InvalidInput("program/plan mismatch: backward slice of sample " +
                           std::to_string(sl.sample_id) + " has no forward slice");
      }
      for (const auto& span : it->second) {
        if (span.start < sl.end && sl.start < span.end) {
          add(ids.forward(last, span.pack), ids.backward(last, pack.index), EdgeKind::kInterStage);
        }
      }
    }
  }

  for (const auto& [id, packs] : packs_by_sample(plan.fwd_packs)) {
    for (std::size_t a = 0; a + 1 < packs.size(); ++a) {
      for (int s = 0; s < pp; ++s) add(ids.forward(s, packs[a]), ids.forward(s, packs[a + 1]), EdgeKind::kInterSlice);
    }
  }
  for (const auto& [id, packs] : packs_by_sample(plan.bwd_packs)) {
    for (std::size_t a = 0; a + 1 < packs.size(); ++a) {
      for (int s = 0; s < pp; ++s) add(ids.backward(s, packs[a]), ids.backward(s, packs[a + 1]), EdgeKind::kInterSlice);
    }
  }

  for (int s = 0; s < pp; ++s) {
    const auto& tasks = program.stages[static_cast<std::size_t>(s)];
    int prev = -1;
    for (const auto& t : tasks) {
      const int limit = t.action == Action::kForward ? ids.num_fwd : ids.num_bwd;
      if (t.stage != s || t.pack_index < 0 || t.pack_index >= limit ||
          (t.action != Action::kForward && t.action != Action::kBackward)) {
        throw InvalidInput("program/plan mismatch at stage " + std::to_string(s));
      }
      const int v = t.action == Action::kForward ? ids.forward(s, t.pack_index)
                                                 : ids.backward(s, t.pack_index);
      if (prev >= 0) add(prev, v, EdgeKind::kSchedule);
      prev = v;
    }
  }
  return dag;
}

Dag build_dag(const RankPlan& plan, const RankProgram& program, const ModelShape& model,
              const HardwareProfile& hw, int pp) {
  Dag dag = build_dag_structure(plan, program, pp);
  const auto layers = layers_per_stage(model, pp);
  for (auto& v : dag.vertices) {
    const double share = static_cast<double>(layers[static_cast<std::size_t>(v.stage)]) /
                         static_cast<double>(model.num_layers);
    const double seconds =
        v.action == Action::kForward
            ? flops_to_seconds(plan.fwd_packs[static_cast<std::size_t>(v.data.pack_index)].fwd_cost, hw)
            : flops_to_seconds(plan.bwd_packs[static_cast<std::size_t>(v.data.pack_index)].bwd_cost, hw);
    v.weight = seconds * share;
  }
  return dag;
}

std::vector<int> topo_sort(const Dag& dag) {
  const int n = static_cast<int>(dag.vertices.size());
  std::vector<std::vector<int>> succ(static_cast<std::size_t>(n));
  std::vector<int> indegree(static_cast<std::size_t>(n), 0);
  for (const auto& e : dag.edges) {
    if (e.from < 0 || e.from >= n || e.to < 0 || e.to >= n) {
      throw InvalidInput("edge endpoint out of range");
    }
    succ[static_cast<std::size_t>(e.from)].push_back(e.to);
    ++indegree[static_cast<std::size_t>(e.to)];
  }
  std::priority_queue<int, std::vector<int>, std::greater<>> ready;
  for (int v = 0; v < n; ++v) {
    if (indegree[static_cast<std::size_t>(v)] == 0) ready.push(v);
  }
  std::vector<int> order;
  order.reserve(static_cast<std::size_t>(n));
  while (!ready.empty()) {
    const int u = ready.top();
    ready.pop();
    order.push_back(u);
    for (int v : succ[static_cast<std::size_t>(u)]) {
      if (--indegree[static_cast<std::size_t>(v)] == 0) ready.push(v);
    }
  }
  if (static_cast<int>(order.size()) == n) return order;

  // Every leftover vertex has a leftover predecessor; walking predecessors
  // must revisit a vertex.
  std::vector<int> pred_in_cycle(static_cast<std::size_t>(n), -1);
  for (const auto& e : dag.edges) {
    if (indegree[static_cast<std::size_t>(e.from)] > 0 && indegree[static_cast<std::size_t>(e.to)] > 0 &&
        pred_in_cycle[static_cast<std::size_t>(e.to)] < 0) {
      pred_in_cycle[static_cast<std::size_t>(e.to)] = e.from;
    }
  }
  int start = 0;
  while (indegree[static_cast<std::size_t>(start)] == 0) ++start;
  std::vector<int> position(static_cast<std::size_t>(n), -1);
  std::vector<int> walk;
  int v = start;
  while (position[static_cast<std::size_t>(v)] < 0) {
    position[static_cast<std::size_t>(v)] = static_cast<int>(walk.size());
    walk.push_back(v);
    v = pred_in_cycle[static_cast<std::size_t>(v)];
  }
  std::vector<int> cycle(walk.begin() + position[static_cast<std::size_t>(v)], walk.end());
  std::reverse(cycle.begin(), cycle.end());
  throw CycleError(std::move(cycle));
}

Timeline compute_timeline(const Dag& dag) {
  const auto order = topo_sort(dag);
  const std::size_t n = dag.vertices.size();
  std::vector<std::vector<int>> succ(n);
  for (const auto& e : dag.edges) succ[static_cast<std::size_t>(e.from)].push_back(e.to);

  Timeline tl;
  tl.start.assign(n, 0.0);
  tl.finish.assign(n, 0.0);
  for (int u : order) {
    const auto ui = static_cast<std::size_t>(u);
    tl.finish[ui] = tl.start[ui] + dag.vertices[ui].weight;
    for (int v : succ[ui]) {
      tl.start[static_cast<std::size_t>(v)] = std::max(tl.start[static_cast<std::size_t>(v)], tl.finish[ui]);
    }
  }
  for (double f : tl.finish) tl.t_total = std::max(tl.t_total, f);
  return tl;
}

std::vector<int> critical_path(const Dag& dag, const Timeline& tl) {
  const std::size_t n = dag.vertices.size();
  if (n == 0) return {};
  std::vector<std::vector<int>> pred(n);
  for (const auto& e : dag.edges) pred[static_cast<std::size_t>(e.to)].push_back(e.from);

  int v = 0;
  for (std::size_t i = 1; i < n; ++i) {
    if (tl.finish[i] > tl.finish[static_cast<std::size_t>(v)]) v = static_cast<int>(i);
  }
  std::vector<int> path{v};
  while (true) {
    int next = -1;
    for (int u : pred[static_cast<std::size_t>(v)]) {
      if (tl.finish[static_cast<std::size_t>(u)] == tl.start[static_cast<std::size_t>(v)] &&
          (next < 0 || u < next)) {
        next = u;
      }
    }
    if (next < 0) break;
    path.push_back(next);
    v = next;
  }
  std::reverse(path.begin(), path.end());
  return path;
}

MemoryTrace memory_trace(const RankPlan& plan, const Dag& dag, const Timeline& tl,
                         const ModelShape& model, const HardwareProfile& hw, int pp) {
  const auto layers = layers_per_stage(model, pp);
  const SampleIndex samples(plan.samples);
  MemoryTrace trace;
  trace.stages.resize(static_cast<std::size_t>(pp));
  for (int s = 0; s < pp; ++s) {
    trace.stages[static_cast<std::size_t>(s)].events.push_back(
        {0.0, hw.static_bytes_per_stage, MemoryReason::kStatic, -1});
  }

  for (std::size_t i = 0; i < dag.vertices.size(); ++i) {
    const Vertex& v = dag.vertices[i];
    const bool fwd = v.action == Action::kForward;
    if (!fwd && v.action != Action::kBackward) continue;
    const auto& pack = fwd ? plan.fwd_packs.at(static_cast<std::size_t>(v.data.pack_index))
                           : plan.bwd_packs.at(static_cast<std::size_t>(v.data.pack_index));
    const std::int64_t stage_layers = layers[static_cast<std::size_t>(v.stage)];
    std::int64_t act = 0;
    std::int64_t kv = 0;
    for (const auto& sl : pack.slices) {
      const Sample& owner = samples.at(sl.sample_id);
      act += slice_bytes(owner, sl.start, sl.end, hw.activation_bytes_per_token_per_layer * stage_layers);
      kv += slice_bytes(owner, sl.start, sl.end, hw.kv_bytes_per_token_per_layer * stage_layers);
    }
    auto& events = trace.stages[static_cast<std::size_t>(v.stage)].events;
    const double t = tl.finish[i];
    const int id = static_cast<int>(i);
    if (fwd) {
      events.push_back({t, act, MemoryReason::kActivationAlloc, id});
      events.push_back({t, kv, MemoryReason::kKvAlloc, id});
    } else {
      events.push_back({t, -act, MemoryReason::kActivationFree, id});
      events.push_back({t, -kv, MemoryReason::kKvFree, id});
    }
  }

  for (auto& stage : trace.stages) {
    std::stable_sort(stage.events.begin(), stage.events.end(),
                     [](const MemoryEvent& a, const MemoryEvent& b) {
                       const bool a_free = a.delta_bytes < 0;
                       const bool b_free = b.delta_bytes < 0;
                       return std::tie(a.time, a_free, a.vertex) < std::tie(b.time, b_free, b.vertex);
                     });
    std::int64_t live = 0;
    for (const auto& e : stage.events) {
      live += e.delta_bytes;
      if (live < 0) throw InvariantViolation("memory trace went negative");
      stage.peak_bytes = std::max(stage.peak_bytes, live);
    }
    if (live != hw.static_bytes_per_stage) {
      throw InvariantViolation("activation allocations and frees do not balance");
    }
  }
  return trace;
}

Metrics compute_metrics(const Dag& dag, const Timeline& tl, int pp, TokenCount tokens) {
  Metrics m;
  m.t_total = tl.t_total;
  m.stages.resize(static_cast<std::size_t>(pp));
  for (const auto& v : dag.vertices) m.stages.at(static_cast<std::size_t>(v.stage)).busy += v.weight;
  for (auto& s : m.stages) {
    s.idle = std::max(0.0, tl.t_total - s.busy);
    s.bubble_fraction = tl.t_total > 0.0 ? s.idle / tl.t_total : 0.0;
  }
  m.tokens_per_second = tl.t_total > 0.0 ? static_cast<double>(tokens) / tl.t_total : 0.0;
  m.critical_path = critical_path(dag, tl);
  return m;
}

}  // namespace micropack
