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

#include "fixtures.h"

#include <sstream>

#include "micropack/errors.h"
#include "micropack/solver.h"

namespace micropack::testing {

ModelShape small_model() { return {256, 4, 4, 2, 688, 1000}; }

HardwareProfile unit_hardware() { return {1e12, 1.0, 1.0, 16, 4, 1000}; }

RankPlan make_rank_plan(const std::vector<Sample>& samples, const std::vector<PackSpec>& fwd,
                        const std::vector<PackSpec>& bwd, const ModelShape& model,
                        const CostMultipliers& mult) {
  RankPlan plan;
  plan.samples = samples;
  for (const auto& spec : fwd) plan.fwd_packs.push_back({0, spec});
  for (const auto& spec : bwd) plan.bwd_packs.push_back({0, spec});
  annotate_packs(plan.fwd_packs, plan.samples, model, mult);
  annotate_packs(plan.bwd_packs, plan.samples, model, mult);
  return plan;
}

RankProgram program_from_text(const std::vector<std::string>& stages) {
  RankProgram program;
  for (std::size_t s = 0; s < stages.size(); ++s) {
    std::istringstream in(stages[s]);
    std::vector<TaskRef> tasks;
    for (std::string tok; in >> tok;) {
      const Action a = tok[0] == 'F' ? Action::kForward : Action::kBackward;
      tasks.push_back({static_cast<int>(s), a, std::stoi(tok.substr(1))});
    }
    program.stages.push_back(std::move(tasks));
  }
  return program;
}

std::vector<std::string> program_to_text(const RankProgram& program) {
  std::vector<std::string> out;
  for (const auto& tasks : program.stages) {
    std::string line;
    for (const auto& t : tasks) {
      if (!line.empty()) line += ' ';
      line += (t.action == Action::kForward ? "F" : "B") + std::to_string(t.pack_index);
    }
    out.push_back(line);
  }
  return out;
}

RankPlan fig7_plan() {
  return make_rank_plan({{0, 1024, 1}, {1, 512, 1}},
                        {{{0, 0, 512}}, {{0, 512, 1024}}, {{1, 0, 512}}},
                        {{{0, 512, 1024}}, {{0, 0, 512}}, {{1, 0, 512}}});
}

RankPlan fig12_plan() {
  const std::vector<Sample> samples{{0, 1024, 1}, {1, 2048, 1}, {2, 256, 1},
                                    {3, 512, 1},  {4, 512, 1},  {5, 1024, 1}};
  return make_rank_plan(samples,
                        {{{0, 0, 1024}},
                         {{1, 0, 1024}},
                         {{1, 1024, 2048}, {2, 0, 256}},
                         {{3, 0, 512}, {4, 0, 512}},
                         {{5, 0, 1024}}},
                        {{{0, 0, 1024}},
                         {{1, 1024, 2048}},
                         {{1, 0, 1024}, {2, 0, 256}},
                         {{3, 0, 512}, {4, 0, 512}},
                         {{5, 0, 1024}}});
}

RankPlan fig9_plan() {
  std::vector<Sample> samples{{0, 6144, 1}, {1, 2048, 1}};
  for (SampleId id = 2; id < 10; ++id) samples.push_back({id, 512, 1});
  return make_rank_plan(samples,
                        {{{0, 0, 2048}},
                         {{0, 2048, 4096}},
                         {{0, 4096, 6144}, {1, 0, 1024}},
                         {{1, 1024, 2048}},
                         {{2, 0, 512}, {3, 0, 512}},
                         {{4, 0, 512}, {5, 0, 512}},
                         {{6, 0, 512}, {7, 0, 512}},
                         {{8, 0, 512}, {9, 0, 512}}},
                        {{{0, 4096, 6144}},
                         {{0, 2048, 4096}},
                         {{0, 0, 2048}},
                         {{1, 1024, 2048}},
                         {{1, 0, 1024}, {2, 0, 512}},
                         {{3, 0, 512}, {4, 0, 512}},
                         {{5, 0, 512}, {6, 0, 512}, {7, 0, 512}},
                         {{8, 0, 512}, {9, 0, 512}}});
}

GlobalBatch random_batch(std::mt19937_64& rng, int count, TokenCount max_len) {
  GlobalBatch batch;
  std::uniform_int_distribution<TokenCount> len(1, max_len);
  for (int i = 0; i < count; ++i) batch.samples.push_back({i, len(rng), 1});
  return batch;
}

RandomRankCase random_rank_plan(std::mt19937_64& rng, const ModelShape& model) {
  RandomRankCase c;
  c.pp = std::uniform_int_distribution<int>(1, 4)(rng);
  const int m = c.pp * std::uniform_int_distribution<int>(1, 4)(rng);
  SolverOptions opts;
  opts.alignment = std::uniform_int_distribution<int>(0, 1)(rng) ? 64 : 16;
  const int count = std::uniform_int_distribution<int>(1, 12)(rng);
  for (;;) {
    const auto batch = random_batch(rng, count, 4096);
    try {
      c.plan = build_rank_plan(0, batch.samples, m, model, CostMultipliers{}, opts);
      return c;
    } catch (const Infeasible&) {
      // fewer grid units than packs; draw again
    }
  }
}

}  // namespace micropack::testing
