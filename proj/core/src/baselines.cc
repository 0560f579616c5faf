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

#include "micropack/baselines.h"

#include <algorithm>
#include <queue>
#include <set>

#include "micropack/errors.h"
#include "micropack/solver.h"

namespace micropack {
namespace {

void check_lengths(const GlobalBatch& batch, const SamplePackConfig& cfg) {
  if (batch.samples.empty()) throw InvalidInput("global batch is empty");
  if (cfg.max_len < 1) throw InvalidInput("max_len must be >= 1");
  for (const auto& s : batch.samples) {
    if (s.length > cfg.max_len) {
      throw InvalidInput("sample " + std::to_string(s.id) + " of length " + std::to_string(s.length) +
                         " exceeds max_len " + std::to_string(cfg.max_len));
    }
  }
}

std::vector<Sample> by_length_desc(std::vector<Sample> samples) {
  std::stable_sort(samples.begin(), samples.end(), [](const Sample& a, const Sample& b) {
    return a.length != b.length ? a.length > b.length : a.id < b.id;
  });
  return samples;
}

SampleId min_id(const std::vector<Sample>& bin) {
  SampleId id = bin.front().id;
  for (const auto& s : bin) id = std::min(id, s.id);
  return id;
}

Flops bin_cost(const std::vector<Sample>& bin, const ModelShape& model) {
  Flops c = 0;
  for (const auto& s : bin) c += sample_cost(model, s);
  return c;
}

void order_by_id(std::vector<Sample>& bin) {
  std::sort(bin.begin(), bin.end(), [](const Sample& a, const Sample& b) { return a.id < b.id; });
}

}  // namespace

SamplePacking best_fit_pack(const GlobalBatch& batch, const SamplePackConfig& cfg) {
  check_lengths(batch, cfg);
  SamplePacking out;
  std::set<std::pair<TokenCount, int>> room;  // (remaining, bin)
  for (const auto& s : by_length_desc(batch.samples)) {
    auto it = room.lower_bound({s.length, -1});
    if (it == room.end()) {
      out.bins.push_back({s});
      room.emplace(cfg.max_len - s.length, static_cast<int>(out.bins.size()) - 1);
      continue;
    }
    const auto [left, bin] = *it;
    room.erase(it);
    out.bins[static_cast<std::size_t>(bin)].push_back(s);
    room.emplace(left - s.length, bin);
  }
  return out;
}

SamplePacking length_pack(const GlobalBatch& batch, const SamplePackConfig& cfg) {
  check_lengths(batch, cfg);
  SamplePacking out;
  TokenCount used = 0;
  for (const auto& s : by_length_desc(batch.samples)) {
    if (out.bins.empty() || used + s.length > cfg.max_len) {
      out.bins.emplace_back();
      used = 0;
    }
    out.bins.back().push_back(s);
    used += s.length;
  }
  return out;
}

SamplePacking tflops_pack(const GlobalBatch& batch, const SamplePackConfig& cfg,
                          const ModelShape& model) {
  check_lengths(batch, cfg);
  std::vector<std::pair<Flops, Sample>> items;
  for (const auto& s : batch.samples) items.emplace_back(sample_cost(model, s), s);
  std::stable_sort(items.begin(), items.end(), [](const auto& a, const auto& b) {
    return a.first != b.first ? a.first > b.first : a.second.id < b.second.id;
  });
  const Flops target = cfg.target_flops.value_or(items.front().first);
  if (target < 1) throw InvalidInput("target_flops must be >= 1");

  SamplePacking out;
  std::vector<Flops> flops;
  std::vector<TokenCount> tokens;
  std::vector<bool> closed;
  for (const auto& [c, s] : items) {
    if (c > target) {
      out.oversized.push_back(static_cast<int>(out.bins.size()));
      out.bins.push_back({s});
      flops.push_back(c);
      tokens.push_back(s.length);
      closed.push_back(true);
      continue;
    }
    std::size_t b = 0;
    while (b < out.bins.size() &&
           (closed[b] || flops[b] + c > target || tokens[b] + s.length > cfg.max_len)) {
      ++b;
    }
    if (b == out.bins.size()) {
      out.bins.emplace_back();
      flops.push_back(0);
      tokens.push_back(0);
      closed.push_back(false);
    }
    out.bins[b].push_back(s);
    flops[b] += c;
    tokens[b] += s.length;
  }
  return out;
}

PackPlan plan_from_sample_packs(const SamplePacking& packing, const ClusterConfig& cluster,
                                const ModelShape& model, const CostMultipliers& mult,
                                std::string strategy) {
  cluster.validate();
  if (packing.bins.empty()) throw InvalidInput("no bins to distribute");
  for (const auto& bin : packing.bins) {
    if (bin.empty()) throw InvalidInput("empty bin");
  }

  std::vector<std::pair<Flops, std::size_t>> order;
  for (std::size_t b = 0; b < packing.bins.size(); ++b) {
    order.emplace_back(bin_cost(packing.bins[b], model), b);
  }
  std::sort(order.begin(), order.end(), [&](const auto& a, const auto& b) {
    return a.first != b.first ? a.first > b.first
                              : min_id(packing.bins[a.second]) < min_id(packing.bins[b.second]);
  });
  using Slot = std::pair<Flops, int>;
  std::priority_queue<Slot, std::vector<Slot>, std::greater<>> heap;
  for (int r = 0; r < cluster.dp; ++r) heap.emplace(0, r);
  std::vector<std::vector<std::vector<Sample>>> per_rank(static_cast<std::size_t>(cluster.dp));
  for (const auto& [c, b] : order) {
    auto [load, r] = heap.top();
    heap.pop();
    per_rank[static_cast<std::size_t>(r)].push_back(packing.bins[b]);
    heap.emplace(load + c, r);
  }

  PackPlan plan;
  plan.strategy = std::move(strategy);
  for (int r = 0; r < cluster.dp; ++r) {
    auto& bins = per_rank[static_cast<std::size_t>(r)];
    if (bins.empty()) {
      throw Infeasible("rank " + std::to_string(r) + " received no packs; batch too small for dp=" +
                       std::to_string(cluster.dp));
    }
    while (bins.size() % static_cast<std::size_t>(cluster.pp) != 0) {
      int heaviest = -1;
      Flops heaviest_cost = -1;
      for (std::size_t b = 0; b < bins.size(); ++b) {
        if (bins[b].size() < 2) continue;
        const Flops c = bin_cost(bins[b], model);
        if (c > heaviest_cost) {
          heaviest = static_cast<int>(b);
          heaviest_cost = c;
        }
      }
      if (heaviest < 0) {
        throw Infeasible("rank " + std::to_string(r) + ": " + std::to_string(bins.size()) +
                         " packs cannot be split to a multiple of pp=" + std::to_string(cluster.pp));
      }
      // LPT of the bin's samples onto two halves.
      std::vector<Sample> src = bins[static_cast<std::size_t>(heaviest)];
      std::stable_sort(src.begin(), src.end(), [&](const Sample& a, const Sample& b) {
        const Flops ca = sample_cost(model, a);
        const Flops cb = sample_cost(model, b);
        return ca != cb ? ca > cb : a.id < b.id;
      });
      std::vector<Sample> halves[2];
      Flops half_cost[2] = {0, 0};
      for (const auto& s : src) {
        const int h = half_cost[1] < half_cost[0] ? 1 : 0;
        halves[h].push_back(s);
        half_cost[h] += sample_cost(model, s);
      }
      bins[static_cast<std::size_t>(heaviest)] = std::move(halves[0]);
      bins.push_back(std::move(halves[1]));
    }
    for (auto& bin : bins) order_by_id(bin);
    std::sort(bins.begin(), bins.end(),
              [](const auto& a, const auto& b) { return a.front().id < b.front().id; });

    RankPlan rp;
    rp.rank = r;
    for (const auto& bin : bins) {
      MicroPack pack;
      for (const auto& s : with_cp(bin, cluster.cp_base)) {
        rp.samples.push_back(s);
        pack.slices.push_back({s.id, 0, s.length});
      }
      rp.fwd_packs.push_back(std::move(pack));
    }
    annotate_packs(rp.fwd_packs, rp.samples, model, mult);
    rp.bwd_packs = rp.fwd_packs;
    long double fwd = 0;
    long double bwd = 0;
    for (const auto& p : rp.fwd_packs) {
      fwd += static_cast<long double>(p.fwd_cost.total());
      bwd += static_cast<long double>(p.bwd_cost.total());
    }
    rp.tau_fwd = static_cast<double>(fwd / rp.m());
    rp.tau_bwd = static_cast<double>(bwd / rp.m());
    plan.ranks.push_back(std::move(rp));
  }
  return plan;
}

}  // namespace micropack
