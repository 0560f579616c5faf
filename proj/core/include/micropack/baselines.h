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

#ifndef MICROPACK_BASELINES_H_
#define MICROPACK_BASELINES_H_

#include <optional>
#include <string>
#include <vector>

#include "micropack/cost_model.h"
#include "micropack/plan.h"
#include "micropack/workload.h"

namespace micropack {

struct SamplePackConfig {
  TokenCount max_len = 131072;
  // tflops_pack only. Defaults to the largest single-sample cost.
  std::optional<Flops> target_flops;

  friend bool operator==(const SamplePackConfig&, const SamplePackConfig&) = default;
};

// Whole-sample bins. `oversized` lists bins holding a single sample whose
// cost alone exceeds the FLOPs target (tflops_pack only).
struct SamplePacking {
  std::vector<std::vector<Sample>> bins;
  std::vector<int> oversized;
};

// Best-fit decreasing by length: each sample goes to the open bin with the
// least remaining room that still fits it (lowest bin index on ties).
SamplePacking best_fit_pack(const GlobalBatch& batch, const SamplePackConfig& cfg);

// Next-fit over samples sorted by descending length.
SamplePacking length_pack(const GlobalBatch& batch, const SamplePackConfig& cfg);

// First-fit over samples sorted by descending cost into bins bounded by both
// the FLOPs target and max_len. A sample above the target gets a bin of its
// own and is reported in `oversized`.
SamplePacking tflops_pack(const GlobalBatch& batch, const SamplePackConfig& cfg,
                          const ModelShape& model);

// Bins go to DP ranks by LPT on forward cost and run in dataloader order
// (smallest sample id first). Forward and backward streams are the same
// packs. When a rank's bin count is not a multiple of pp, its heaviest
// multi-sample bins are split in two until it is; throws Infeasible when
// that runs out of splittable bins.
PackPlan plan_from_sample_packs(const SamplePacking& packing, const ClusterConfig& cluster,
                                const ModelShape& model, const CostMultipliers& mult,
                                std::string strategy);

}  // namespace micropack

#endif  // MICROPACK_BASELINES_H_
