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

#include "micropack/io/config.h"

#include <filesystem>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>

#include "micropack/errors.h"
#include "json_reader.h"

namespace micropack::io {
namespace {

template <typename Fn>
void validated(const std::string& where, Fn&& fn) {
  try {
    fn();
  } catch (const InvalidInput& e) {
    throw ParseError(where, e.what());
  }
}

}  // namespace

std::string_view to_string(Strategy s) {
  switch (s) {
    case Strategy::kSliced:
      return "slimpack";
    case Strategy::kBestFit:
      return "best_fit";
    case Strategy::kLength:
      return "length";
    case Strategy::kTflops:
      return "tflops";
  }
  return "?";
}

Strategy strategy_from_string(std::string_view name) {
  if (name == "slimpack") return Strategy::kSliced;
  if (name == "best_fit") return Strategy::kBestFit;
  if (name == "length") return Strategy::kLength;
  if (name == "tflops") return Strategy::kTflops;
  throw InvalidInput("unknown strategy '" + std::string(name) + "'");
}

ModelShape llama_7b() { return {4096, 32, 32, 32, 11008, 32000}; }

HardwareProfile reference_hardware() {
  return {989e12, 0.7, 0.5, 17408, 2048, 3500000000};
}

void RunConfig::validate() const {
  validated("/model", [&] { model.validate(); });
  validated("/cluster", [&] { cluster.validate(); });
  validated("/hardware", [&] { hardware.validate(); });
  validated("/multipliers", [&] { multipliers.validate(); });
  validated("/solver", [&] { solver.validate(); });
  validated("/workload", [&] {
    workload.spec.validate();
    if (workload.count < 1) throw InvalidInput("count must be >= 1");
  });
  if (baseline.max_len < 1) throw ParseError("/baseline/max_len", "must be >= 1");
  if (baseline.target_flops && *baseline.target_flops < 1) {
    throw ParseError("/baseline/target_flops", "must be >= 1");
  }
  if (!(gantt_px_per_second > 0.0)) throw ParseError("/gantt/px_per_second", "must be > 0");
}

RunConfig config_from_json(const Json& doc) {
  RunConfig c;
  JsonReader root(doc, "");
  const auto version = root.require<int>("version");
  if (version != kConfigVersion) {
    throw ParseError("/version", "unsupported config version " + std::to_string(version));
  }
  if (auto m = root.child("model")) {
    c.model.hidden_dim = m->get("hidden_dim", c.model.hidden_dim);
    c.model.num_layers = m->get("num_layers", c.model.num_layers);
    c.model.num_heads = m->get("num_heads", c.model.num_heads);
    c.model.num_kv_groups = m->get("num_kv_groups", c.model.num_heads);
    c.model.ffn_dim = m->get("ffn_dim", c.model.ffn_dim);
    c.model.vocab_size = m->get("vocab_size", c.model.vocab_size);
    m->finish();
  }
  if (auto k = root.child("cluster")) {
    c.cluster.dp = k->get("dp", c.cluster.dp);
    c.cluster.pp = k->get("pp", c.cluster.pp);
    c.cluster.cp_base = k->get("cp_base", c.cluster.cp_base);
    c.cluster.mem_budget_bytes = k->get("mem_budget_bytes", c.cluster.mem_budget_bytes);
    k->finish();
  }
  if (auto h = root.child("hardware")) {
    c.hardware.peak_flops_per_sec = h->get("peak_flops_per_sec", c.hardware.peak_flops_per_sec);
    c.hardware.util_gemm = h->get("util_gemm", c.hardware.util_gemm);
    c.hardware.util_attn = h->get("util_attn", c.hardware.util_attn);
    c.hardware.activation_bytes_per_token_per_layer = h->get(
        "activation_bytes_per_token_per_layer", c.hardware.activation_bytes_per_token_per_layer);
    c.hardware.kv_bytes_per_token_per_layer =
        h->get("kv_bytes_per_token_per_layer", c.hardware.kv_bytes_per_token_per_layer);
    c.hardware.static_bytes_per_stage =
        h->get("static_bytes_per_stage", c.hardware.static_bytes_per_stage);
    h->finish();
  }
  if (auto m = root.child("multipliers")) {
    c.multipliers.gemm = m->get("gemm", c.multipliers.gemm);
    c.multipliers.attn = m->get("attn", c.multipliers.attn);
    m->finish();
  }
  if (auto s = root.child("solver")) {
    c.solver.alignment = s->get("alignment", c.solver.alignment);
    c.solver.i_candidates = s->get("i_candidates", c.solver.i_candidates);
    c.solver.refinement_passes = s->get("refinement_passes", c.solver.refinement_passes);
    c.solver.outlier_threshold = s->get("outlier_threshold", c.solver.outlier_threshold);
    c.solver.jobs = s->get("jobs", c.solver.jobs);
    s->finish();
  }
  if (auto w = root.child("workload")) {
    auto manifest = w->child("manifest");
    auto synthetic = w->child("synthetic");
    if (manifest && synthetic) {
      throw ParseError("/workload", "give exactly one of \"manifest\" and \"synthetic\"");
    }
    if (manifest) {
      c.workload.manifest_path = manifest->require<std::string>("path");
      const auto format = manifest->get<std::string>("format", "plain");
      try {
        c.workload.manifest_format = manifest_format_from_string(format);
      } catch (const InvalidInput& e) {
        throw ParseError("/workload/manifest/format", e.what());
      }
      manifest->finish();
    }
    if (synthetic) {
      auto& spec = c.workload.spec;
      spec.body_mu = synthetic->get("body_mu", spec.body_mu);
      spec.body_sigma = synthetic->get("body_sigma", spec.body_sigma);
      spec.tail_scale = synthetic->get("tail_scale", spec.tail_scale);
      spec.tail_alpha = synthetic->get("tail_alpha", spec.tail_alpha);
      spec.tail_fraction = synthetic->get("tail_fraction", spec.tail_fraction);
      spec.min_len = synthetic->get("min_len", spec.min_len);
      spec.max_len = synthetic->get("max_len", spec.max_len);
      c.workload.seed = synthetic->get("seed", c.workload.seed);
      c.workload.count = synthetic->get("count", c.workload.count);
      synthetic->finish();
    }
    w->finish();
  }
  try {
    if (root.has("schedule")) {
      c.schedule = schedule_kind_from_string(root.require<std::string>("schedule"));
    }
  } catch (const InvalidInput& e) {
    throw ParseError("/schedule", e.what());
  }
  try {
    if (root.has("strategy")) c.strategy = strategy_from_string(root.require<std::string>("strategy"));
  } catch (const InvalidInput& e) {
    throw ParseError("/strategy", e.what());
  }
  if (auto b = root.child("baseline")) {
    c.baseline.max_len = b->get("max_len", c.baseline.max_len);
    if (b->has("target_flops") && !b->is_null("target_flops")) {
      c.baseline.target_flops = b->require<Flops>("target_flops");
    }
    b->finish();
  }
  if (auto g = root.child("gantt")) {
    c.gantt_px_per_second = g->get("px_per_second", c.gantt_px_per_second);
    g->finish();
  }
  root.finish();
  c.validate();
  return c;
}

RunConfig load_config(std::istream& in) {
  Json doc;
  try {
    doc = Json::parse(in);
  } catch (const Json::parse_error& e) {
    throw ParseError("byte " + std::to_string(e.byte), "invalid JSON");
  }
  return config_from_json(doc);
}

RunConfig load_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError(path, "cannot open config file");
  return load_config(in);
}

Json config_to_json(const RunConfig& c) {
  Json doc;
  doc["version"] = kConfigVersion;
  doc["model"] = {{"hidden_dim", c.model.hidden_dim},
                  {"num_layers", c.model.num_layers},
                  {"num_heads", c.model.num_heads},
                  {"num_kv_groups", c.model.num_kv_groups},
                  {"ffn_dim", c.model.ffn_dim},
                  {"vocab_size", c.model.vocab_size}};
  doc["cluster"] = {{"dp", c.cluster.dp},
                    {"pp", c.cluster.pp},
                    {"cp_base", c.cluster.cp_base},
                    {"mem_budget_bytes", c.cluster.mem_budget_bytes}};
  doc["hardware"] = {
      {"peak_flops_per_sec", c.hardware.peak_flops_per_sec},
      {"util_gemm", c.hardware.util_gemm},
      {"util_attn", c.hardware.util_attn},
      {"activation_bytes_per_token_per_layer", c.hardware.activation_bytes_per_token_per_layer},
      {"kv_bytes_per_token_per_layer", c.hardware.kv_bytes_per_token_per_layer},
      {"static_bytes_per_stage", c.hardware.static_bytes_per_stage}};
  doc["multipliers"] = {{"gemm", c.multipliers.gemm}, {"attn", c.multipliers.attn}};
  doc["solver"] = {{"alignment", c.solver.alignment},
                   {"i_candidates", c.solver.i_candidates},
                   {"refinement_passes", c.solver.refinement_passes},
                   {"outlier_threshold", c.solver.outlier_threshold}};
  if (c.workload.manifest_path) {
    doc["workload"] = {{"manifest",
                        {{"path", *c.workload.manifest_path},
                         {"format", c.workload.manifest_format == ManifestFormat::kPlain ? "plain"
                                                                                         : "jsonl"}}}};
  } else {
    const auto& s = c.workload.spec;
    doc["workload"] = {{"synthetic",
                        {{"body_mu", s.body_mu},
                         {"body_sigma", s.body_sigma},
                         {"tail_scale", s.tail_scale},
                         {"tail_alpha", s.tail_alpha},
                         {"tail_fraction", s.tail_fraction},
                         {"min_len", s.min_len},
                         {"max_len", s.max_len},
                         {"seed", c.workload.seed},
                         {"count", c.workload.count}}}};
  }
  doc["schedule"] = std::string(to_string(c.schedule));
  doc["strategy"] = std::string(to_string(c.strategy));
  doc["baseline"] = {{"max_len", c.baseline.max_len}};
  doc["baseline"]["target_flops"] =
      c.baseline.target_flops ? Json(*c.baseline.target_flops) : Json(nullptr);
  doc["gantt"] = {{"px_per_second", c.gantt_px_per_second}};
  return doc;
}

GlobalBatch load_workload(const RunConfig& config, const std::string& base_dir) {
  if (!config.workload.manifest_path) {
    return generate_synthetic(config.workload.spec, config.workload.seed, config.workload.count);
  }
  std::filesystem::path path(*config.workload.manifest_path);
  if (path.is_relative()) path = std::filesystem::path(base_dir) / path;
  std::ifstream in(path);
  if (!in) throw ParseError("/workload/manifest/path", "cannot open " + path.string());
  return load_lengths(in, config.workload.manifest_format, path.string());
}

std::string dump(const Json& doc) { return doc.dump(2) + "\n"; }

}  // namespace micropack::io
