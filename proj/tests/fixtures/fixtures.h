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

#ifndef MICROPACK_TESTS_FIXTURES_H_
#define MICROPACK_TESTS_FIXTURES_H_

#include <random>
#include <string>
#include <vector>

#include "micropack/cost_model.h"
#include "micropack/plan.h"
#include "micropack/schedule.h"
#include "micropack/workload.h"

namespace micropack::testing {

// A small model so that fixture FLOPs stay readable.
ModelShape small_model();
HardwareProfile unit_hardware();

// One pack per list entry; slices are {sample, start, end}.
using PackSpec = std::vector<Slice>;

// Annotated rank plan built from explicit pack contents.
RankPlan make_rank_plan(const std::vector<Sample>& samples, const std::vector<PackSpec>& fwd,
                        const std::vector<PackSpec>& bwd, const ModelShape& model = small_model(),
                        const CostMultipliers& mult = {});

// One string per stage, e.g. "F0 F1 B0 F2 B1 B2".
RankProgram program_from_text(const std::vector<std::string>& stages);
std::vector<std::string> program_to_text(const RankProgram& program);

// Two stages, samples 0 (two units, sliced) and 1 (one unit): forward
// packs {s0 head}, {s0 tail}, {s1}; backward packs {s0 tail}, {s0 head},
// {s1}.
RankPlan fig7_plan();

// Six samples in five forward and five backward packs, pp = 2. Sample 1 is
// sliced across forward packs 1 and 2; backward pack 1 holds only its tail.
RankPlan fig12_plan();

// Ten samples in eight forward and eight backward packs, pp = 4. Sample 0
// spans forward packs 0-2 and sample 1 spans packs 2-3.
RankPlan fig9_plan();

// Random batch of `count` samples with lengths in [1, max_len].
GlobalBatch random_batch(std::mt19937_64& rng, int count, TokenCount max_len);

struct RandomRankCase {
  RankPlan plan;
  int pp = 1;
};

// Solver-built rank plan for a random small batch, pp in [1, 4] and
// m = i * pp for a random i in [1, 4].
RandomRankCase random_rank_plan(std::mt19937_64& rng, const ModelShape& model);

}  // namespace micropack::testing

#endif  // MICROPACK_TESTS_FIXTURES_H_
