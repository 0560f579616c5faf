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

#include <gtest/gtest.h>

#include <algorithm>
#include <random>

#include "fixtures.h"
#include "micropack/errors.h"
#include "micropack/io/config.h"
#include "micropack/io/runner.h"
#include "micropack/solver.h"

namespace micropack {
namespace {

GlobalBatch batch_of(const std::vector<TokenCount>& lengths) {
  GlobalBatch b;
  for (std::size_t i = 0; i < lengths.size(); ++i) {
    b.samples.push_back({static_cast<SampleId>(i), lengths[i], 1});
  }
  return b;
}

std::vector<std::vector<TokenCount>> bin_lengths(const SamplePacking& p) {
  std::vector<std::vector<TokenCount>> out;
  for (const auto& bin : p.bins) {
    out.emplace_back();
    for (const auto& s : bin) out.back().push_back(s.length);
  }
  return out;
}

TEST(BestFitTest, PairsLargestWithTightestFit) {
  SamplePackConfig cfg;
  cfg.max_len = 10;
  const auto p = best_fit_pack(batch_of({6, 5, 4, 3}), cfg);
  EXPECT_EQ(bin_lengths(p), (std::vector<std::vector<TokenCount>>{{6, 4}, {5, 3}}));
}

TEST(BestFitTest, FullLengthSamplesGetOneBinEach) {
  SamplePackConfig cfg;
  cfg.max_len = 8;
  const auto p = best_fit_pack(batch_of({8, 8, 8}), cfg);
  EXPECT_EQ(p.bins.size(), 3u);
}

TEST(BestFitTest, RejectsSampleAboveMaxLen) {
  SamplePackConfig cfg;
  cfg.max_len = 8;
  EXPECT_THROW(best_fit_pack(batch_of({9}), cfg), InvalidInput);
  EXPECT_THROW(best_fit_pack(GlobalBatch{}, cfg), InvalidInput);
}

TEST(LengthPackTest, NextFitInDescendingOrder) {
  SamplePackConfig cfg;
  cfg.max_len = 10;
  EXPECT_EQ(bin_lengths(length_pack(batch_of({1, 8, 1}), cfg)),
            (std::vector<std::vector<TokenCount>>{{8, 1, 1}}));
  EXPECT_EQ(bin_lengths(length_pack(batch_of({6, 5, 4, 3}), cfg)),
            (std::vector<std::vector<TokenCount>>{{6}, {5, 4}, {3}}));
}

TEST(TflopsPackTest, OutlierAboveTargetIsFlagged) {
  const auto model = testing::small_model();
  SamplePackConfig cfg;
  cfg.max_len = 100000;
  cfg.target_flops = sample_cost(model, {0, 1000, 1});
  const auto p = tflops_pack(batch_of({300, 5000, 300, 400}), cfg, model);
  ASSERT_EQ(p.oversized.size(), 1u);
  const auto& big = p.bins[static_cast<std::size_t>(p.oversized[0])];
  ASSERT_EQ(big.size(), 1u);
  EXPECT_EQ(big[0].length, 5000);
  for (std::size_t b = 0; b < p.bins.size(); ++b) {
    if (static_cast<int>(b) == p.oversized[0]) continue;
    Flops c = 0;
    for (const auto& s : p.bins[b]) c += sample_cost(model, s);
    EXPECT_LE(c, *cfg.target_flops);
  }
}

TEST(TflopsPackTest, DefaultTargetIsLargestSample) {
  const auto model = testing::small_model();
  SamplePackConfig cfg;
  const auto p = tflops_pack(batch_of({2048, 512, 512, 1024}), cfg, model);
  EXPECT_TRUE(p.oversized.empty());
  EXPECT_EQ(p.bins.front().size(), 1u);
}

TEST(SamplePackPlanTest, EqualBinsSpreadEvenly) {
  SamplePacking p;
  for (int i = 0; i < 8; ++i) p.bins.push_back({{i, 512, 1}});
  ClusterConfig cluster;
  cluster.dp = 4;
  cluster.pp = 2;
  const auto plan =
      plan_from_sample_packs(p, cluster, testing::small_model(), CostMultipliers{}, "best_fit");
  ASSERT_EQ(plan.ranks.size(), 4u);
  for (const auto& r : plan.ranks) {
    EXPECT_EQ(r.m(), 2);
    EXPECT_EQ(r.fwd_packs, r.bwd_packs);
  }
  EXPECT_EQ(check_plan(plan, 2), "");
}

TEST(SamplePackPlanTest, SplitsBinsToReachPpMultiple) {
  SamplePacking p;
  p.bins.push_back({{0, 512, 1}, {1, 512, 1}, {2, 256, 1}});
  ClusterConfig cluster;
  cluster.pp = 2;
  const auto plan =
      plan_from_sample_packs(p, cluster, testing::small_model(), CostMultipliers{}, "length");
  ASSERT_EQ(plan.ranks.size(), 1u);
  EXPECT_EQ(plan.ranks[0].m(), 2);
  EXPECT_EQ(check_plan(plan, 2), "");

  SamplePacking single;
  single.bins.push_back({{0, 512, 1}});
  EXPECT_THROW(
      plan_from_sample_packs(single, cluster, testing::small_model(), CostMultipliers{}, "length"),
      Infeasible);
}

TEST(SamplePackPlanTest, ConservesSamples) {
  std::mt19937_64 rng(3);
  const auto model = testing::small_model();
  for (int trial = 0; trial < 30; ++trial) {
    const auto batch = testing::random_batch(rng, 40, 4096);
    SamplePackConfig cfg;
    cfg.max_len = 4096;
    ClusterConfig cluster;
    cluster.dp = 2;
    cluster.pp = 2;
    for (const auto& packing :
         {best_fit_pack(batch, cfg), length_pack(batch, cfg), tflops_pack(batch, cfg, model)}) {
      const auto plan = plan_from_sample_packs(packing, cluster, model, CostMultipliers{}, "x");
      EXPECT_EQ(check_plan(plan, 2), "");
      EXPECT_EQ(plan.total_tokens(), batch.total_tokens());
    }
  }
}

TEST(SamplePackPlanTest, BaselineBackwardSpreadExceedsSlicedPlan) {
  io::RunConfig cfg;
  cfg.cluster.dp = 1;
  cfg.cluster.pp = 2;
  cfg.workload.count = 400;
  const auto batch = io::load_workload(cfg);
  cfg.strategy = io::Strategy::kSliced;
  const auto slim = io::run_strategy(cfg, batch);
  cfg.strategy = io::Strategy::kBestFit;
  const auto fit = io::run_strategy(cfg, batch);
  const double slim_cv = io::cost_stats(io::pack_costs(slim.doc.plan, true)).cv;
  const double fit_cv = io::cost_stats(io::pack_costs(fit.doc.plan, true)).cv;
  EXPECT_GT(fit_cv, slim_cv);
}

}  // namespace
}  // namespace micropack
