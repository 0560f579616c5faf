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

#ifndef MICROPACK_IO_CONFIG_H_
#define MICROPACK_IO_CONFIG_H_

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>

#include <nlohmann/json.hpp>

#include "micropack/baselines.h"
#include "micropack/cost_model.h"
#include "micropack/plan.h"
#include "micropack/schedule.h"
#include "micropack/solver.h"
#include "micropack/workload.h"

namespace micropack::io {

using Json = nlohmann::ordered_json;

inline constexpr int kConfigVersion = 1;
inline constexpr int kPlanVersion = 1;
inline constexpr int kTimelineVersion = 1;
inline constexpr int kReportVersion = 1;

enum class Strategy { kSliced, kBestFit, kLength, kTflops };

std::string_view to_string(Strategy s);
Strategy strategy_from_string(std::string_view name);

// Exactly one of a manifest path or a synthetic spec.
struct WorkloadSource {
  std::optional<std::string> manifest_path;
  ManifestFormat manifest_format = ManifestFormat::kPlain;
  LengthDistributionSpec spec = reference_length_spec();
  std::uint64_t seed = kReferenceSeed;
  int count = kReferenceCount;
};

// Llama-7B dimensions.
ModelShape llama_7b();

// H100-class accelerator: 989 TFLOP/s dense BF16 peak, 70% GEMM and 50%
// attention utilization, 17 KiB of activations and 2 KiB of KV per token
// per layer, 3.5 GB of weights and optimizer state per stage.
HardwareProfile reference_hardware();

struct RunConfig {
  ModelShape model = llama_7b();
  ClusterConfig cluster;
  HardwareProfile hardware = reference_hardware();
  CostMultipliers multipliers;
  SolverOptions solver;
  WorkloadSource workload;
  ScheduleKind schedule = ScheduleKind::kOneFOneB;
  Strategy strategy = Strategy::kSliced;
  SamplePackConfig baseline;
  double gantt_px_per_second = 10.0;

  // Throws InvalidInput naming the offending field.
  void validate() const;
};

// "version" is required; every other section falls back to defaults.
// Unknown keys are rejected. Errors are ParseError with a JSON pointer in
// where().
RunConfig config_from_json(const Json& doc);
RunConfig load_config(std::istream& in);
RunConfig load_config_file(const std::string& path);

// solver.jobs is left out: artifacts must not depend on the worker count.
Json config_to_json(const RunConfig& config);

// Reads the manifest (relative paths resolve against `base_dir`) or draws the
// synthetic batch.
GlobalBatch load_workload(const RunConfig& config, const std::string& base_dir = ".");

// Deterministic pretty printing shared by every JSON artifact.
std::string dump(const Json& doc);

}  // namespace micropack::io

#endif  // MICROPACK_IO_CONFIG_H_
