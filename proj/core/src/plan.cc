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

#include "micropack/plan.h"

#include <sstream>

#include "micropack/errors.h"

namespace micropack {

void ClusterConfig::validate() const {
  if (dp < 1 || pp < 1 || cp_base < 1) {
    throw InvalidInput("ClusterConfig dp, pp and cp_base must be >= 1");
  }
  if (mem_budget_bytes < 0) throw InvalidInput("ClusterConfig.mem_budget_bytes must be >= 0");
}

TokenCount PackPlan::total_tokens() const {
  // Merged outliers appear on every member; count each sample id once.
  TokenCount n = 0;
  std::vector<SampleId> seen;
  for (const auto& r : ranks) {
    for (const auto& s : r.samples) {
      if (s.cp_degree > 1) {
        bool dup = false;
        for (SampleId id : seen) dup = dup || id == s.id;
        if (dup) continue;
        seen.push_back(s.id);
      }
      n += s.length;
    }
  }
  return n;
}

std::string check_plan(const PackPlan& plan, int pp) {
  std::ostringstream err;
  for (const auto& r : plan.ranks) {
    const int m = r.m();
    if (m < 1 || m % pp != 0) {
      err << "rank " << r.rank << ": pack count " << m << " is not a positive multiple of pp=" << pp;
      return err.str();
    }
    if (static_cast<int>(r.bwd_packs.size()) != m) {
      err << "rank " << r.rank << ": " << r.bwd_packs.size() << " backward packs for " << m
          << " forward packs";
      return err.str();
    }
    for (const auto* packs : {&r.fwd_packs, &r.bwd_packs}) {
      for (std::size_t i = 0; i < packs->size(); ++i) {
        if ((*packs)[i].slices.empty() || (*packs)[i].index != static_cast<int>(i)) {
          err << "rank " << r.rank << ": pack " << i << " is empty or misnumbered";
          return err.str();
        }
      }
    }
    if (auto e = check_stream(r.fwd_packs, r.samples, SliceOrder::kAscending); !e.empty()) {
      return "rank " + std::to_string(r.rank) + " forward: " + e;
    }
    if (auto e = check_stream(r.bwd_packs, r.samples, SliceOrder::kDescending); !e.empty()) {
      return "rank " + std::to_string(r.rank) + " backward: " + e;
    }
  }
  return {};
}

void annotate_packs(std::vector<MicroPack>& packs, const std::vector<Sample>& samples,
                    const ModelShape& model, const CostMultipliers& mult) {
  const SampleIndex index(samples);
  for (std::size_t i = 0; i < packs.size(); ++i) {
    MicroPack& p = packs[i];
    p.index = static_cast<int>(i);
    p.fwd_cost = {};
    p.bwd_cost = {};
    for (const auto& sl : p.slices) {
      const SliceCost c = slice_cost(model, index.at(sl.sample_id), sl.start, sl.end);
      p.fwd_cost += c;
      p.bwd_cost += backward_flops(c, mult);
    }
    p.state = classify_state(p.slices, index);
  }
}

}  // namespace micropack
