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

#include "micropack/schedule.h"

#include <gtest/gtest.h>

#include <random>

#include "fixtures.h"
#include "micropack/errors.h"
#include "micropack/solver.h"

namespace micropack {
namespace {

using testing::fig12_plan;
using testing::fig7_plan;
using testing::fig9_plan;
using testing::make_rank_plan;
using testing::program_from_text;
using testing::program_to_text;

using Lines = std::vector<std::string>;

RankPlan whole_samples(int count) {
  std::vector<Sample> samples;
  std::vector<testing::PackSpec> packs;
  for (int i = 0; i < count; ++i) {
    samples.push_back({i, 256, 1});
    packs.push_back({{i, 0, 256}});
  }
  return make_rank_plan(samples, packs, packs);
}

TEST(GpipeTest, SingleStage) {
  const auto plan = whole_samples(2);
  EXPECT_EQ(program_to_text(build_gpipe_program(plan, 1)), (Lines{"F0 F1 B0 B1"}));
  EXPECT_EQ(program_to_text(build_gpipe_program(whole_samples(1), 1)), (Lines{"F0 B0"}));
}

TEST(GpipeTest, SixteenSamplesEightPacks) {
  std::vector<Sample> samples;
  for (int i = 0; i < 16; ++i) samples.push_back({i, 512 + 128 * (i % 5), 1});
  const auto plan =
      build_rank_plan(0, samples, 8, testing::small_model(), CostMultipliers{}, SolverOptions{});
  const auto program = build_gpipe_program(plan, 2);
  const Lines expected{"F0 F1 F2 F3 F4 F5 F6 F7 B0 B1 B2 B3 B4 B5 B6 B7",
                       "F0 F1 F2 F3 F4 F5 F6 F7 B0 B1 B2 B3 B4 B5 B6 B7"};
  EXPECT_EQ(program_to_text(program), expected);
  EXPECT_NO_THROW(validate_program(program, plan, 2));
}

TEST(OneFOneBTest, TextbookWhenEveryPackIsOneSample) {
  const auto plan = whole_samples(4);
  const auto program = build_1f1b_program(plan, 4);
  const Lines expected{"F0 F1 F2 F3 B0 B1 B2 B3", "F0 F1 F2 B0 F3 B1 B2 B3",
                       "F0 F1 B0 F2 B1 F3 B2 B3", "F0 B0 F1 B1 F2 B2 F3 B3"};
  EXPECT_EQ(program_to_text(program), expected);
  const auto stats = program_stats(program, 4);
  EXPECT_EQ(stats.warmup_forwards, (std::vector<int>{4, 3, 2, 1}));
  EXPECT_EQ(stats.injected_forwards, (std::vector<int>{0, 0, 0, 0}));
  EXPECT_NO_THROW(validate_program(program, plan, 4));
}

TEST(OneFOneBTest, WarmupDepthWithoutInjection) {
  const auto plan = whole_samples(12);
  for (int pp = 1; pp <= 4; ++pp) {
    const auto stats = program_stats(build_1f1b_program(plan, pp), pp);
    for (int s = 0; s < pp; ++s) {
      EXPECT_EQ(stats.warmup_forwards[static_cast<std::size_t>(s)], pp - s);
      EXPECT_EQ(stats.injected_forwards[static_cast<std::size_t>(s)], 0);
    }
  }
}

// Backward pack 1 holds only the tail of sample 1, whose last forward slice
// sits in forward pack 2. The last stage would issue B1 after F0, F1 in plain
// 1F1B; F2 must come first, so exactly one forward is injected. Stage 0 keeps
// its one-pack lead over stage 1 and also issues one extra forward there.
TEST(OneFOneBTest, InjectsOneForwardForSplitSample) {
  const auto plan = fig12_plan();
  EXPECT_EQ(backward_readiness(plan), (std::vector<int>{0, 2, 2, 3, 4}));
  const auto program = build_1f1b_program(plan, 2);
  const Lines expected{"F0 F1 B0 F2 F3 B1 B2 F4 B3 B4", "F0 B0 F1 F2 B1 B2 F3 B3 F4 B4"};
  EXPECT_EQ(program_to_text(program), expected);
  const auto stats = program_stats(program, 2);
  EXPECT_EQ(stats.warmup_forwards, (std::vector<int>{2, 1}));
  EXPECT_EQ(stats.injected_forwards, (std::vector<int>{1, 1}));
  EXPECT_NO_THROW(validate_program(program, plan, 2));
}

// Sample 0 spans forward packs 0-2, so its tail backward (B0) needs F2 on the
// last stage: two forwards beyond the plain single-pack warm-up. Upstream
// stages keep their pp - 1 - s lead, giving warm-ups 6, 5, 4, 3. B1 and B2
// (the rest of sample 0) then run back to back.
TEST(OneFOneBTest, TenSamplesEightPacks) {
  const auto plan = fig9_plan();
  EXPECT_EQ(backward_readiness(plan), (std::vector<int>{2, 2, 2, 3, 4, 5, 6, 7}));
  const auto program = build_1f1b_program(plan, 4);
  const Lines expected{"F0 F1 F2 F3 F4 F5 B0 B1 B2 F6 B3 F7 B4 B5 B6 B7",
                       "F0 F1 F2 F3 F4 B0 B1 B2 F5 B3 F6 B4 F7 B5 B6 B7",
                       "F0 F1 F2 F3 B0 B1 B2 F4 B3 F5 B4 F6 B5 F7 B6 B7",
                       "F0 F1 F2 B0 B1 B2 F3 B3 F4 B4 F5 B5 F6 B6 F7 B7"};
  EXPECT_EQ(program_to_text(program), expected);
  const auto stats = program_stats(program, 4);
  EXPECT_EQ(stats.warmup_forwards, (std::vector<int>{6, 5, 4, 3}));
  EXPECT_EQ(stats.injected_forwards, (std::vector<int>{2, 2, 2, 2}));
  EXPECT_NO_THROW(validate_program(program, plan, 4));
}

TEST(OneFOneBTest, InjectionIsMinimal) {
  // Removing any forward ahead of the first backward on the last stage
  // leaves that backward without its inputs.
  for (const auto& [plan, pp] : {std::pair{fig12_plan(), 2}, std::pair{fig9_plan(), 4}}) {
    const auto program = build_1f1b_program(plan, pp);
    const auto need = backward_readiness(plan);
    const auto& last = program.stages.back();
    int forwards = 0;
    for (const auto& t : last) {
      if (t.action == Action::kForward) {
        ++forwards;
        continue;
      }
      EXPECT_GE(forwards, need[static_cast<std::size_t>(t.pack_index)] + 1);
      // Forwards beyond the plain position are only ever the ones needed.
      const int plain = t.pack_index + 1;
      if (forwards > plain) EXPECT_EQ(forwards, need[static_cast<std::size_t>(t.pack_index)] + 1);
    }
  }
}

TEST(ValidateTest, DetectsBackwardBeforeForward) {
  const auto plan = fig7_plan();
  const auto bad = program_from_text({"B0 F0 F1 F2 B1 B2", "F0 F1 B0 B1 F2 B2"});
  EXPECT_THROW(validate_program(bad, plan, 2), InvalidInput);
}

TEST(ValidateTest, DetectsMissingTask) {
  const auto plan = fig7_plan();
  const auto bad = program_from_text({"F0 F1 F2 B0 B1", "F0 F1 B0 B1 F2 B2"});
  EXPECT_THROW(validate_program(bad, plan, 2), InvalidInput);
}

TEST(ValidateTest, DetectsFifoViolation) {
  const auto plan = fig7_plan();
  const auto bad = program_from_text({"F1 F0 F2 B0 B1 B2", "F0 F1 B0 B1 F2 B2"});
  EXPECT_THROW(validate_program(bad, plan, 2), InvalidInput);
}

TEST(ValidateTest, DetectsFiloViolation) {
  // B1 holds sample 0's head, which must wait for B0 (its tail).
  const auto plan = fig7_plan();
  const auto bad = program_from_text({"F0 F1 F2 B0 B1 B2", "F0 F1 B1 B0 F2 B2"});
  EXPECT_THROW(validate_program(bad, plan, 2), InvalidInput);
}

TEST(ScheduleTest, RejectsMalformedStreams) {
  auto plan = fig7_plan();
  std::swap(plan.bwd_packs[0], plan.bwd_packs[1]);
  EXPECT_THROW(build_1f1b_program(plan, 2), InvalidInput);
}

TEST(ScheduleTest, RandomPlansGiveValidPrograms) {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 100; ++trial) {
    const auto c = testing::random_rank_plan(rng, testing::small_model());
    for (auto kind : {ScheduleKind::kGPipe, ScheduleKind::kOneFOneB}) {
      const auto program = build_program(c.plan, c.pp, kind);
      ASSERT_NO_THROW(validate_program(program, c.plan, c.pp));
      EXPECT_EQ(program, build_program(c.plan, c.pp, kind));
    }
  }
}

TEST(ScheduleTest, KindNames) {
  EXPECT_EQ(schedule_kind_from_string("1f1b"), ScheduleKind::kOneFOneB);
  EXPECT_EQ(schedule_kind_from_string("gpipe"), ScheduleKind::kGPipe);
  EXPECT_THROW(schedule_kind_from_string("zb"), InvalidInput);
}

}  // namespace
}  // namespace micropack
