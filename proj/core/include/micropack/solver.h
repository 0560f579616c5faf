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

#ifndef MICROPACK_SOLVER_H_
#define MICROPACK_SOLVER_H_

#include <cstdint>
#include <string>
#include <vector>

#include "micropack/cost_model.h"
#include "micropack/plan.h"
#include "micropack/schedule.h"
#include "micropack/workload.h"

namespace micropack {

struct SolverOptions {
  // Slice boundaries sit on multiples of `alignment`; a sample shorter than
  // two grid steps is one unit and the last unit of a sample absorbs the
  // sub-grid remainder.
  TokenCount alignment = 64;
  std::vector<int> i_candidates{1, 2, 4, 8, 16};
  // Upper bound on improving moves applied to the heaviest pack after the
  // greedy pass.
  int refinement_passes = 256;
  double outlier_threshold = 1.0;
  // Worker threads for candidate evaluation. Results do not depend on it.
  int jobs = 1;

  void validate() const;

  friend bool operator==(const SolverOptions&, const SolverOptions&) = default;
};

struct DpAssignment {
  std::vector<std::vector<Sample>> per_rank_samples;  // descending forward cost
  std::vector<Flops> per_rank_capacity;               // total / dp on every rank
  std::vector<Flops> per_rank_load;
};

// Forward cost of a sample as seen by one rank (cp_degree applied).
Flops sample_cost(const ModelShape& model, const Sample& sample);

// LPT: samples by descending forward cost (ascending id on ties), each to the
// least-loaded rank (lowest rank on ties).
DpAssignment phase1_assign(const GlobalBatch& batch, int dp, const ModelShape& model);

// Samples with f(x) > outlier_threshold * total / dp, descending by cost.
std::vector<SampleId> detect_outliers(const DpAssignment& assign, const SolverOptions& opts,
                                      const ModelShape& model);

// Smallest g in [2, dp] with f(x*) / g <= the smallest capacity among
// non-member ranks (all ranks when g = dp). Members are the outlier's home
// rank plus the g - 1 least-loaded ranks not listed in `unavailable`.
// Throws Infeasible when no g works.
DpMergeGroup plan_dp_merge(const DpAssignment& assign, SampleId outlier, const ModelShape& model,
                           const std::vector<int>& unavailable = {});

// Replaces the outlier on every member by a share with cp_degree = g and
// re-balances the members' other samples among them by LPT, starting from
// the share's load.
void apply_dp_merge(DpAssignment& assign, const DpMergeGroup& group, const ModelShape& model);

// Runs detect_outliers, plan_dp_merge and apply_dp_merge until no outlier
// is left. Groups are disjoint. No-op when dp < 2.
std::vector<DpMergeGroup> resolve_outliers(DpAssignment& assign, const SolverOptions& opts,
                                           const ModelShape& model);

// Number of grid units of one sample.
std::int64_t unit_count(const Sample& sample, TokenCount alignment);

// Splits the stream into m packs of near-equal forward cost. Samples are
// visited in the given order and sliced head first. Packs are annotated.
// Throws Infeasible when the stream has fewer than m grid units.
std::vector<MicroPack> phase2_partition(const std::vector<Sample>& samples, int m,
                                        const ModelShape& model, const SolverOptions& opts);

// Same partitioner on backward cost. Samples keep the forward stream order
// and are sliced tail first, the order in which their gradients flow.
std::vector<MicroPack> asymmetric_repartition(const std::vector<Sample>& samples, int m,
                                              const ModelShape& model,
                                              const CostMultipliers& mult,
                                              const SolverOptions& opts);

// The forward partition reused for backward: same boundaries, packs
// reversed so that every sample is visited tail first.
std::vector<MicroPack> mirrored_backward(const std::vector<MicroPack>& fwd_packs,
                                         const std::vector<Sample>& samples,
                                         const ModelShape& model, const CostMultipliers& mult);

std::vector<int> sweep_candidates(int pp, const SolverOptions& opts);

// Copy of `samples` with cp_degree multiplied by `cp`.
std::vector<Sample> with_cp(std::vector<Sample> samples, std::int64_t cp);

// Builds both streams of one rank for pack count m.
RankPlan build_rank_plan(int rank, const std::vector<Sample>& samples, int m,
                         const ModelShape& model, const CostMultipliers& mult,
                         const SolverOptions& opts);

struct CandidateEvaluation {
  int rank = 0;
  int m = 0;
  bool feasible = false;
  double t_total = 0.0;
  std::int64_t peak_bytes = 0;
  bool chosen = false;
  std::string note;  // why an infeasible candidate was dropped
};

struct SolveResult {
  // Holds ranks only when every rank has a chosen candidate.
  PackPlan plan;
  std::vector<CandidateEvaluation> evaluations;  // by rank, then m
};

// Phase 1, DP-Merge, then every (rank, m) candidate built and simulated.
// Per rank, the memory-feasible candidate with the smallest simulated
// t_total is marked chosen (smaller m on ties). Does not throw when a rank
// has no feasible candidate.
SolveResult evaluate_candidates(const GlobalBatch& batch, const ClusterConfig& cluster,
                                const ModelShape& model, const HardwareProfile& hw,
                                const CostMultipliers& mult, const SolverOptions& opts,
                                ScheduleKind kind = ScheduleKind::kOneFOneB);

// evaluate_candidates, throwing Infeasible when some rank has no feasible
// candidate.
SolveResult solve(const GlobalBatch& batch, const ClusterConfig& cluster, const ModelShape& model,
                  const HardwareProfile& hw, const CostMultipliers& mult,
                  const SolverOptions& opts, ScheduleKind kind = ScheduleKind::kOneFOneB);

// Minimal achievable max-pack forward cost over every assignment of grid
// units to m nonempty packs that keeps each sample's units in pack order.
// Limited to 6 samples, m <= 3 and 24 units; throws InvalidInput beyond.
Flops exact_partition_oracle(const std::vector<Sample>& samples, int m, const ModelShape& model,
                             const SolverOptions& opts);

}  // namespace micropack

#endif  // MICROPACK_SOLVER_H_
