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

#include "micropack/io/plan_json.h"

#include <fstream>

#include "json_reader.h"
#include "micropack/errors.h"

namespace micropack::io {
namespace {

Json cost_json(const SliceCost& c) { return {{"attn", c.attn}, {"linear", c.linear}}; }

Json packs_json(const std::vector<MicroPack>& packs) {
  Json out = Json::array();
  for (const auto& p : packs) {
    Json slices = Json::array();
    for (const auto& s : p.slices) slices.push_back({s.sample_id, s.start, s.end});
    out.push_back({{"index", p.index},
                   {"state", std::string(to_string(p.state))},
                   {"slices", std::move(slices)},
                   {"fwd_flops", cost_json(p.fwd_cost)},
                   {"bwd_flops", cost_json(p.bwd_cost)}});
  }
  return out;
}

SliceCost cost_from(JsonReader& parent, const std::string& key) {
  auto r = parent.child(key);
  if (!r) throw ParseError(parent.pointer() + "/" + key, "missing field");
  SliceCost c{r->require<Flops>("attn"), r->require<Flops>("linear")};
  r->finish();
  return c;
}

std::vector<std::int64_t> triple(const Json& v, const std::string& where) {
  auto t = JsonReader::convert<std::vector<std::int64_t>>(v, where);
  if (t.size() != 3) throw ParseError(where, "expected three integers");
  return t;
}

std::vector<MicroPack> packs_from(const Json& arr, const std::string& where,
                                  const std::vector<Sample>& samples, const RunConfig& config) {
  if (!arr.is_array()) throw ParseError(where, "expected an array");
  std::vector<MicroPack> packs;
  for (std::size_t i = 0; i < arr.size(); ++i) {
    const std::string at = where + "/" + std::to_string(i);
    JsonReader r(arr[i], at);
    MicroPack p;
    p.index = r.require<int>("index");
    try {
      p.state = pack_state_from_string(r.require<std::string>("state"));
    } catch (const InvalidInput& e) {
      throw ParseError(at + "/state", e.what());
    }
    const Json& slices = r.raw("slices");
    if (!slices.is_array()) throw ParseError(at + "/slices", "expected an array");
    for (std::size_t j = 0; j < slices.size(); ++j) {
      const auto t = triple(slices[j], at + "/slices/" + std::to_string(j));
      p.slices.push_back({t[0], t[1], t[2]});
    }
    p.fwd_cost = cost_from(r, "fwd_flops");
    p.bwd_cost = cost_from(r, "bwd_flops");
    r.finish();
    packs.push_back(std::move(p));
  }
  std::vector<MicroPack> expected = packs;
  try {
    annotate_packs(expected, samples, config.model, config.multipliers);
  } catch (const InvalidInput& e) {
    throw ParseError(where, e.what());
  }
  for (std::size_t i = 0; i < packs.size(); ++i) {
    const std::string at = where + "/" + std::to_string(i);
    if (packs[i].index != static_cast<int>(i)) throw ParseError(at + "/index", "packs must be numbered 0..m-1");
    if (packs[i].state != expected[i].state) throw ParseError(at + "/state", "does not match the slices");
    if (packs[i].fwd_cost != expected[i].fwd_cost) {
      throw ParseError(at + "/fwd_flops", "does not match the model");
    }
    if (packs[i].bwd_cost != expected[i].bwd_cost) {
      throw ParseError(at + "/bwd_flops", "does not match the model and multipliers");
    }
  }
  return packs;
}

}  // namespace

Json plan_to_json(const PlanDocument& doc) {
  Json out;
  out["version"] = kPlanVersion;
  out["strategy"] = doc.plan.strategy;
  out["config"] = config_to_json(doc.config);
  Json groups = Json::array();
  for (const auto& g : doc.plan.merge_groups) {
    groups.push_back({{"member_ranks", g.member_ranks},
                      {"cp_degree", g.cp_degree},
                      {"outlier_sample_id", g.outlier_sample_id}});
  }
  out["merge_groups"] = std::move(groups);
  Json ranks = Json::array();
  for (const auto& r : doc.plan.ranks) {
    Json samples = Json::array();
    for (const auto& s : r.samples) samples.push_back({s.id, s.length, s.cp_degree});
    ranks.push_back({{"rank", r.rank},
                     {"m", r.m()},
                     {"tau_fwd", r.tau_fwd},
                     {"tau_bwd", r.tau_bwd},
                     {"samples", std::move(samples)},
                     {"fwd_packs", packs_json(r.fwd_packs)},
                     {"bwd_packs", packs_json(r.bwd_packs)}});
  }
  out["ranks"] = std::move(ranks);
  return out;
}

PlanDocument plan_from_json(const Json& json) {
  JsonReader root(json, "");
  const int version = root.require<int>("version");
  if (version != kPlanVersion) {
    throw ParseError("/version", "unsupported plan version " + std::to_string(version));
  }
  PlanDocument doc;
  doc.plan.strategy = root.require<std::string>("strategy");
  doc.config = config_from_json(root.raw("config"));

  const Json& groups = root.raw("merge_groups");
  if (!groups.is_array()) throw ParseError("/merge_groups", "expected an array");
  for (std::size_t i = 0; i < groups.size(); ++i) {
    JsonReader g(groups[i], "/merge_groups/" + std::to_string(i));
    DpMergeGroup group;
    group.member_ranks = g.require<std::vector<int>>("member_ranks");
    group.cp_degree = g.require<int>("cp_degree");
    group.outlier_sample_id = g.require<SampleId>("outlier_sample_id");
    g.finish();
    doc.plan.merge_groups.push_back(std::move(group));
  }

  const Json& ranks = root.raw("ranks");
  if (!ranks.is_array()) throw ParseError("/ranks", "expected an array");
  for (std::size_t i = 0; i < ranks.size(); ++i) {
    const std::string at = "/ranks/" + std::to_string(i);
    JsonReader r(ranks[i], at);
    RankPlan rp;
    rp.rank = r.require<int>("rank");
    const int m = r.require<int>("m");
    rp.tau_fwd = r.require<double>("tau_fwd");
    rp.tau_bwd = r.require<double>("tau_bwd");
    const Json& samples = r.raw("samples");
    if (!samples.is_array()) throw ParseError(at + "/samples", "expected an array");
    for (std::size_t j = 0; j < samples.size(); ++j) {
      const std::string where = at + "/samples/" + std::to_string(j);
      const auto t = triple(samples[j], where);
      if (t[1] < 1 || t[2] < 1) throw ParseError(where, "length and cp_degree must be >= 1");
      rp.samples.push_back({t[0], t[1], t[2]});
    }
    try {
      SampleIndex check(rp.samples);
    } catch (const InvalidInput& e) {
      throw ParseError(at + "/samples", e.what());
    }
    rp.fwd_packs = packs_from(r.raw("fwd_packs"), at + "/fwd_packs", rp.samples, doc.config);
    rp.bwd_packs = packs_from(r.raw("bwd_packs"), at + "/bwd_packs", rp.samples, doc.config);
    if (rp.m() != m) throw ParseError(at + "/m", "does not match the number of forward packs");
    r.finish();
    doc.plan.ranks.push_back(std::move(rp));
  }
  root.finish();
  if (auto err = check_plan(doc.plan, doc.config.cluster.pp); !err.empty()) {
    throw ParseError("/ranks", err);
  }
  return doc;
}

PlanDocument load_plan(std::istream& in) {
  Json doc;
  try {
    doc = Json::parse(in);
  } catch (const Json::parse_error& e) {
    throw ParseError("byte " + std::to_string(e.byte), "invalid JSON");
  }
  return plan_from_json(doc);
}

PlanDocument load_plan_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError(path, "cannot open plan file");
  return load_plan(in);
}

}  // namespace micropack::io
