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

#include "micropack/io/runner.h"

#include <algorithm>
#include <cmath>

#include "micropack/baselines.h"
#include "micropack/errors.h"

namespace micropack::io {

StrategyRun run_strategy(const RunConfig& config, const GlobalBatch& batch) {
  StrategyRun run;
  run.doc.config = config;
  if (config.strategy == Strategy::kSliced) {
    auto result = solve(batch, config.cluster, config.model, config.hardware, config.multipliers,
                        config.solver, config.schedule);
    run.doc.plan = std::move(result.plan);
    run.evaluations = std::move(result.evaluations);
    return run;
  }
  SamplePacking packing;
  switch (config.strategy) {
    case Strategy::kBestFit:
      packing = best_fit_pack(batch, config.baseline);
      break;
    case Strategy::kLength:
      packing = length_pack(batch, config.baseline);
      break;
    case Strategy::kTflops:
      packing = tflops_pack(batch, config.baseline, config.model);
      break;
    case Strategy::kSliced:
      break;
  }
  run.oversized = static_cast<int>(packing.oversized.size());
  run.doc.plan = plan_from_sample_packs(packing, config.cluster, config.model, config.multipliers,
                                        std::string(to_string(config.strategy)));
  return run;
}

PlanSimulation simulate_document(const PlanDocument& doc) {
  return simulate_plan(doc.plan, doc.config.model, doc.config.hardware, doc.config.cluster.pp,
                       doc.config.schedule, doc.config.solver.jobs);
}

CostStats cost_stats(std::vector<double> values) {
  CostStats s;
  if (values.empty()) return s;
  std::sort(values.begin(), values.end());
  const auto quantile = [&](double q) {
    const double pos = q * static_cast<double>(values.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const std::size_t hi = std::min(lo + 1, values.size() - 1);
    return values[lo] + (pos - static_cast<double>(lo)) * (values[hi] - values[lo]);
  };
  s.min = values.front();
  s.q1 = quantile(0.25);
  s.median = quantile(0.5);
  s.q3 = quantile(0.75);
  s.max = values.back();
  long double sum = 0;
  for (double v : values) sum += v;
  const long double mean = sum / static_cast<long double>(values.size());
  long double var = 0;
  for (double v : values) var += (v - mean) * (v - mean);
  var /= static_cast<long double>(values.size());
  s.cv = mean > 0 ? static_cast<double>(std::sqrt(var) / mean) : 0.0;
  return s;
}

std::vector<double> pack_costs(const PackPlan& plan, bool backward) {
  std::vector<double> out;
  for (const auto& r : plan.ranks) {
    for (const auto& p : backward ? r.bwd_packs : r.fwd_packs) {
      out.push_back(static_cast<double>(backward ? p.bwd_cost.total() : p.fwd_cost.total()));
    }
  }
  return out;
}

Json cost_stats_json(const CostStats& s) {
  return {{"min", s.min}, {"q1", s.q1}, {"median", s.median},
          {"q3", s.q3},   {"max", s.max}, {"cv", s.cv}};
}

Json compare_report(const RunConfig& config, const GlobalBatch& batch) {
  Json strategies = Json::array();
  std::vector<std::pair<std::string, double>> times;
  for (Strategy s : {Strategy::kSliced, Strategy::kBestFit, Strategy::kLength, Strategy::kTflops}) {
    RunConfig c = config;
    c.strategy = s;
    Json entry;
    entry["strategy"] = std::string(to_string(s));
    try {
      const auto run = run_strategy(c, batch);
      const auto sim = simulate_document(run.doc);
      entry["t_total"] = sim.t_total;
      entry["tokens_per_second"] = sim.tokens_per_second;
      entry["peak_bytes"] = sim.peak_bytes;
      entry["within_budget"] = sim.peak_bytes <= c.cluster.mem_budget_bytes;
      Json m = Json::array();
      for (const auto& r : run.doc.plan.ranks) m.push_back(r.m());
      entry["m"] = std::move(m);
      entry["fwd"] = cost_stats_json(cost_stats(pack_costs(run.doc.plan, false)));
      entry["bwd"] = cost_stats_json(cost_stats(pack_costs(run.doc.plan, true)));
      entry["oversized"] = run.oversized;
      times.emplace_back(entry["strategy"].get<std::string>(), sim.t_total);
    } catch (const Infeasible& e) {
      entry["error"] = e.what();
    }
    strategies.push_back(std::move(entry));
  }
  double reference = 0.0;
  for (const auto& [name, t] : times) {
    if (name == "best_fit") reference = t;
  }
  for (auto& entry : strategies) {
    if (!entry.contains("t_total")) continue;
    const double t = entry["t_total"].get<double>();
    entry["speedup_vs_best_fit"] = reference > 0 && t > 0 ? Json(reference / t) : Json(nullptr);
  }
  Json out;
  out["version"] = kReportVersion;
  out["report"] = "compare";
  out["config"] = config_to_json(config);
  out["samples"] = batch.samples.size();
  out["strategies"] = std::move(strategies);
  return out;
}

Json sweep_report(const RunConfig& config, const GlobalBatch& batch) {
  const auto result = evaluate_candidates(batch, config.cluster, config.model, config.hardware,
                                          config.multipliers, config.solver, config.schedule);
  Json candidates = Json::array();
  for (const auto& e : result.evaluations) {
    Json c = {{"rank", e.rank},
              {"m", e.m},
              {"feasible", e.feasible},
              {"chosen", e.chosen},
              {"t_total", e.t_total},
              {"peak_bytes", e.peak_bytes}};
    c["note"] = e.note;
    candidates.push_back(std::move(c));
  }
  Json out;
  out["version"] = kReportVersion;
  out["report"] = "sweep";
  out["config"] = config_to_json(config);
  out["candidates"] = std::move(candidates);
  return out;
}

}  // namespace micropack::io
