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

#ifndef MICROPACK_IO_PLAN_JSON_H_
#define MICROPACK_IO_PLAN_JSON_H_

#include <iosfwd>
#include <string>

#include "micropack/io/config.h"
#include "micropack/plan.h"

namespace micropack::io {

struct PlanDocument {
  RunConfig config;
  PackPlan plan;
};

// {version, strategy, config, merge_groups, ranks}; each rank lists its
// samples as [id, length, cp_degree] and its packs with slices as
// [sample_id, start, end].
Json plan_to_json(const PlanDocument& doc);

// Rejects unknown versions, malformed fields, plans failing check_plan and
// FLOPs that disagree with the echoed model. Errors are ParseError with a
// JSON pointer.
PlanDocument plan_from_json(const Json& json);
PlanDocument load_plan(std::istream& in);
PlanDocument load_plan_file(const std::string& path);

}  // namespace micropack::io

#endif  // MICROPACK_IO_PLAN_JSON_H_
