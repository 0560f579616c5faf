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

#ifndef MICROPACK_IO_TIMELINE_H_
#define MICROPACK_IO_TIMELINE_H_

#include <string>

#include "micropack/io/config.h"
#include "micropack/simulate.h"

namespace micropack::io {

// {version, schedule, t_total, tokens_per_second, peak_bytes, ranks}; each
// rank carries per-stage busy/idle/bubble_fraction/peak_bytes, the critical
// path, its program and one record per vertex.
Json timeline_to_json(const PlanSimulation& sim, ScheduleKind kind);

// Header plus one row per vertex of every rank. Numbers use the shortest
// round-trip representation.
std::string vertex_csv(const PlanSimulation& sim);

// One lane per (rank, stage); forward and backward in distinct colors, idle
// time left blank.
std::string gantt_svg(const PlanSimulation& sim, double px_per_second);

}  // namespace micropack::io

#endif  // MICROPACK_IO_TIMELINE_H_
