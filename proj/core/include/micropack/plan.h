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

#ifndef MICROPACK_PLAN_H_
#define MICROPACK_PLAN_H_

#include <cstdint>
#include <string>
#include <vector>

#include "micropack/cost_model.h"
#include "micropack/workload.h"

namespace micropack {

struct ClusterConfig {
  int dp = 1;
  int pp = 1;
  int cp_base = 1;
  std::int64_t mem_budget_bytes = INT64_MAX;

  void validate() const;

  friend bool operator==(const ClusterConfig&, const ClusterConfig&) = default;
};

// One context-parallel group formed to absorb an outlier sample.
struct DpMergeGroup {
  std::vector<int> member_ranks;  // ascending
  int cp_degree = 1;
  SampleId outlier_sample_id = 0;

  friend bool operator==(const DpMergeGroup&, const DpMergeGroup&) = default;
};

// Pack streams of one DP replica. Forward packs run in index order with each
// sample's slices ascending; backward packs run in index order with each
// sample's slices descending (tail slice first).
struct RankPlan {
  int rank = 0;
  std::vector<Sample> samples;  // stream order
  std::vector<MicroPack> fwd_packs;
  std::vector<MicroPack> bwd_packs;
  double tau_fwd = 0.0;
  double tau_bwd = 0.0;

  int m() const { return static_cast<int>(fwd_packs.size()); }

  friend bool operator==(const RankPlan&, const RankPlan&) = default;
};

struct PackPlan {
  std::string strategy;
  std::vector<RankPlan> ranks;
  std::vector<DpMergeGroup> merge_groups;

  TokenCount total_tokens() const;

  friend bool operator==(const PackPlan&, const PackPlan&) = default;
};

// Token conservation and slice order for both streams of every rank, equal
// forward/backward pack counts, and pack count a positive multiple of pp.
// Returns an empty string when the plan is well formed.
std::string check_plan(const PackPlan& plan, int pp);

// Fills fwd_cost, bwd_cost and state of every pack from its slices.
void annotate_packs(std::vector<MicroPack>& packs, const std::vector<Sample>& samples,
                    const ModelShape& model, const CostMultipliers& mult);

}  // namespace micropack

#endif  // MICROPACK_PLAN_H_
