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

#ifndef MICROPACK_TESTS_ORACLES_H_
#define MICROPACK_TESTS_ORACLES_H_

#include <cstdint>
#include <random>
#include <vector>

#include "micropack/cost_model.h"
#include "micropack/dagsim.h"

namespace micropack::testing {

// Heaviest path by enumerating every path from every source vertex, without
// memoization. Each path is summed from its first vertex onward.
double longest_path_bruteforce(const Dag& dag);

// Random DAG with forward-only edges (u < v). Weights are multiples of 1/8
// so that sums are exact.
Dag random_dag(std::mt19937_64& rng, int max_vertices, int max_edges);

// Optimal makespan of `jobs` on `machines` identical machines by exhaustive
// search (machine symmetry broken on first use).
Flops makespan_optimum(const std::vector<Flops>& jobs, int machines);

// Makespan of list scheduling in descending job order.
Flops makespan_lpt(std::vector<Flops> jobs, int machines);

// Largest running sum of the events in order, and whether any prefix went
// negative.
struct PrefixScan {
  std::int64_t max_prefix = 0;
  bool negative = false;
  std::int64_t final_sum = 0;
};
PrefixScan scan_events(const std::vector<MemoryEvent>& events);

}  // namespace micropack::testing

#endif  // MICROPACK_TESTS_ORACLES_H_
