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

#include "oracles.h"

#include <algorithm>
#include <functional>
#include <set>

namespace micropack::testing {

double longest_path_bruteforce(const Dag& dag) {
  const auto n = dag.vertices.size();
  std::vector<std::vector<int>> succ(n);
  std::vector<int> indegree(n, 0);
  for (const auto& e : dag.edges) {
    succ[static_cast<std::size_t>(e.from)].push_back(e.to);
    ++indegree[static_cast<std::size_t>(e.to)];
  }
  double best = 0.0;
  std::function<void(int, double)> walk = [&](int v, double sum) {
    sum += dag.vertices[static_cast<std::size_t>(v)].weight;
    best = std::max(best, sum);
    for (int w : succ[static_cast<std::size_t>(v)]) walk(w, sum);
  };
  for (std::size_t v = 0; v < n; ++v) {
    if (indegree[v] == 0) walk(static_cast<int>(v), 0.0);
  }
  return best;
}

Dag random_dag(std::mt19937_64& rng, int max_vertices, int max_edges) {
  Dag dag;
  const int n = std::uniform_int_distribution<int>(1, max_vertices)(rng);
  std::uniform_int_distribution<int> eighths(0, 80);
  for (int v = 0; v < n; ++v) {
    Vertex vx;
    vx.data.pack_index = v;
    vx.weight = eighths(rng) / 8.0;
    dag.vertices.push_back(vx);
  }
  if (n < 2) return dag;
  const int possible = n * (n - 1) / 2;
  const int target = std::uniform_int_distribution<int>(0, std::min(max_edges, possible))(rng);
  std::set<std::pair<int, int>> used;
  std::uniform_int_distribution<int> pick(0, n - 1);
  while (static_cast<int>(used.size()) < target) {
    int a = pick(rng);
    int b = pick(rng);
    if (a == b) continue;
    if (a > b) std::swap(a, b);
    if (used.emplace(a, b).second) dag.edges.push_back({a, b, EdgeKind::kSchedule});
  }
  return dag;
}

Flops makespan_optimum(const std::vector<Flops>& jobs, int machines) {
  std::vector<Flops> sorted = jobs;
  std::sort(sorted.rbegin(), sorted.rend());
  std::vector<Flops> load(static_cast<std::size_t>(machines), 0);
  Flops best = makespan_lpt(jobs, machines);
  std::function<void(std::size_t, Flops)> place = [&](std::size_t i, Flops current) {
    if (current >= best) return;
    if (i == sorted.size()) {
      best = current;
      return;
    }
    for (std::size_t m = 0; m < load.size(); ++m) {
      load[m] += sorted[i];
      place(i + 1, std::max(current, load[m]));
      load[m] -= sorted[i];
      if (load[m] == 0) break;  // every empty machine is equivalent
    }
  };
  place(0, 0);
  return best;
}

Flops makespan_lpt(std::vector<Flops> jobs, int machines) {
  std::sort(jobs.rbegin(), jobs.rend());
  std::vector<Flops> load(static_cast<std::size_t>(machines), 0);
  for (Flops j : jobs) *std::min_element(load.begin(), load.end()) += j;
  return *std::max_element(load.begin(), load.end());
}

PrefixScan scan_events(const std::vector<MemoryEvent>& events) {
  PrefixScan scan;
  for (const auto& e : events) {
    scan.final_sum += e.delta_bytes;
    scan.max_prefix = std::max(scan.max_prefix, scan.final_sum);
    if (scan.final_sum < 0) scan.negative = true;
  }
  return scan;
}

}  // namespace micropack::testing
