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

#include "micropack/io/timeline.h"

#include <algorithm>
#include <charconv>
#include <string_view>

namespace micropack::io {
namespace {

std::string num(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

std::string fixed(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v, std::chars_format::fixed, 2);
  return std::string(buf, res.ptr);
}

std::string label(const Vertex& v) {
  std::string out = v.action == Action::kForward ? "F" : "B";
  out += std::to_string(v.data.pack_index);
  if (v.data.slice_index) out += "." + std::to_string(*v.data.slice_index);
  return out;
}

std::string_view color(Action a) {
  switch (a) {
    case Action::kForward:
      return "#4c72b0";
    case Action::kBackward:
      return "#dd8452";
    case Action::kRecompute:
      return "#55a868";
    case Action::kOffload:
      return "#8172b3";
  }
  return "#999999";
}

}  // namespace

Json timeline_to_json(const PlanSimulation& sim, ScheduleKind kind) {
  Json out;
  out["version"] = kTimelineVersion;
  out["schedule"] = std::string(to_string(kind));
  out["t_total"] = sim.t_total;
  out["tokens_per_second"] = sim.tokens_per_second;
  out["peak_bytes"] = sim.peak_bytes;
  Json ranks = Json::array();
  for (const auto& r : sim.ranks) {
    Json stages = Json::array();
    for (std::size_t s = 0; s < r.metrics.stages.size(); ++s) {
      const auto& m = r.metrics.stages[s];
      stages.push_back({{"stage", s},
                        {"busy", m.busy},
                        {"idle", m.idle},
                        {"bubble_fraction", m.bubble_fraction},
                        {"peak_bytes", r.memory.stages[s].peak_bytes}});
    }
    Json program = Json::array();
    for (const auto& tasks : r.program.stages) {
      Json lane = Json::array();
      for (const auto& t : tasks) {
        lane.push_back((t.action == Action::kForward ? "F" : "B") + std::to_string(t.pack_index));
      }
      program.push_back(std::move(lane));
    }
    Json vertices = Json::array();
    for (std::size_t i = 0; i < r.dag.vertices.size(); ++i) {
      const auto& v = r.dag.vertices[i];
      vertices.push_back({{"id", i},
                          {"stage", v.stage},
                          {"action", std::string(to_string(v.action))},
                          {"pack", v.data.pack_index},
                          {"slice", v.data.slice_index ? Json(*v.data.slice_index) : Json(nullptr)},
                          {"weight", v.weight},
                          {"start", r.timeline.start[i]},
                          {"finish", r.timeline.finish[i]}});
    }
    ranks.push_back({{"rank", r.rank},
                     {"t_total", r.metrics.t_total},
                     {"tokens_per_second", r.metrics.tokens_per_second},
                     {"peak_bytes", r.memory.peak_bytes()},
                     {"stages", std::move(stages)},
                     {"critical_path", r.metrics.critical_path},
                     {"program", std::move(program)},
                     {"vertices", std::move(vertices)}});
  }
  out["ranks"] = std::move(ranks);
  return out;
}

std::string vertex_csv(const PlanSimulation& sim) {
  std::string out = "rank,vertex,stage,action,pack,slice,weight,start,finish\n";
  for (const auto& r : sim.ranks) {
    for (std::size_t i = 0; i < r.dag.vertices.size(); ++i) {
      const auto& v = r.dag.vertices[i];
      out += std::to_string(r.rank) + "," + std::to_string(i) + "," + std::to_string(v.stage) + "," +
             std::string(to_string(v.action)) + "," + std::to_string(v.data.pack_index) + "," +
             (v.data.slice_index ? std::to_string(*v.data.slice_index) : "") + "," +
             num(v.weight) + "," + num(r.timeline.start[i]) + "," + num(r.timeline.finish[i]) +
             "\n";
    }
  }
  return out;
}

std::string gantt_svg(const PlanSimulation& sim, double px_per_second) {
  constexpr double kLane = 24.0;
  constexpr double kGap = 12.0;
  constexpr double kLeft = 90.0;
  constexpr double kTop = 20.0;
  int lanes = 0;
  for (const auto& r : sim.ranks) lanes += static_cast<int>(r.metrics.stages.size());
  const double width = kLeft + std::max(1.0, sim.t_total * px_per_second) + 20.0;
  const double height =
      kTop + lanes * kLane + static_cast<double>(std::max<std::size_t>(sim.ranks.size(), 1)) * kGap + 20.0;

  std::string out = "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + fixed(width) +
                    "\" height=\"" + fixed(height) + "\" font-family=\"monospace\" font-size=\"10\">\n";
  out += "<rect width=\"100%\" height=\"100%\" fill=\"#ffffff\"/>\n";
  double y = kTop;
  for (const auto& r : sim.ranks) {
    const int stages = static_cast<int>(r.metrics.stages.size());
    for (int s = 0; s < stages; ++s) {
      const double lane_y = y + s * kLane;
      out += "<text x=\"4\" y=\"" + fixed(lane_y + kLane * 0.65) + "\">rank " +
             std::to_string(r.rank) + " s" + std::to_string(s) + "</text>\n";
      out += "<line x1=\"" + fixed(kLeft) + "\" y1=\"" + fixed(lane_y + kLane) + "\" x2=\"" +
             fixed(width - 20.0) + "\" y2=\"" + fixed(lane_y + kLane) +
             "\" stroke=\"#dddddd\"/>\n";
    }
    for (std::size_t i = 0; i < r.dag.vertices.size(); ++i) {
      const auto& v = r.dag.vertices[i];
      const double x = kLeft + r.timeline.start[i] * px_per_second;
      const double w = (r.timeline.finish[i] - r.timeline.start[i]) * px_per_second;
      const double lane_y = y + v.stage * kLane + 2.0;
      out += "<rect x=\"" + fixed(x) + "\" y=\"" + fixed(lane_y) + "\" width=\"" + fixed(w) +
             "\" height=\"" + fixed(kLane - 4.0) + "\" fill=\"" + std::string(color(v.action)) +
             "\" stroke=\"#333333\" stroke-width=\"0.5\"><title>" + label(v) + "</title></rect>\n";
      if (w >= 18.0) {
        out += "<text x=\"" + fixed(x + 2.0) + "\" y=\"" + fixed(lane_y + kLane * 0.55) +
               "\" fill=\"#ffffff\">" + label(v) + "</text>\n";
      }
    }
    y += stages * kLane + kGap;
  }
  out += "</svg>\n";
  return out;
}

}  // namespace micropack::io
