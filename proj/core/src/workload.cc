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

#include "micropack/workload.h"

#include <algorithm>
#include <cmath>
#include <istream>
#include <map>
#include <numbers>
#include <ostream>
#include <sstream>

#include "json.hpp"
#include "micropack/errors.h"

namespace micropack {
namespace {

std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// Counter-based stream: sample i of seed s always sees the same draws.
// std:: distributions are avoided because their output is implementation
// defined.
class SampleStream {
 public:
  SampleStream(std::uint64_t seed, std::uint64_t index) {
    std::uint64_t s = index;
    state_ = seed ^ splitmix64(s);
  }

  // Uniform in the open interval (0, 1).
  double uniform() {
    return (static_cast<double>(splitmix64(state_) >> 11) + 0.5) * 0x1.0p-53;
  }

 private:
  std::uint64_t state_;
};

std::string trim(const std::string& line) {
  const auto first = line.find_first_not_of(" \t\r");
  if (first == std::string::npos) return {};
  const auto last = line.find_last_not_of(" \t\r");
  return line.substr(first, last - first + 1);
}

std::string line_ref(int line_no) { return "line " + std::to_string(line_no); }

TokenCount parse_plain(const std::string& text, int line_no) {
  TokenCount value = 0;
  std::size_t used = 0;
  try {
    value = std::stoll(text, &used);
  } catch (const std::exception&) {
    throw ParseError(line_ref(line_no), "expected a positive integer, got '" + text + "'");
  }
  if (used != text.size()) {
    throw ParseError(line_ref(line_no), "expected a positive integer, got '" + text + "'");
  }
  return value;
}

TokenCount parse_jsonl(const std::string& text, int line_no) {
  nlohmann::json obj;
  try {
    obj = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(line_ref(line_no), std::string("invalid JSON: ") + e.what());
  }
  if (!obj.is_object() || !obj.contains("length")) {
    throw ParseError(line_ref(line_no), "object with a \"length\" field expected");
  }
  const auto& len = obj.at("length");
  if (!len.is_number_integer()) {
    throw ParseError(line_ref(line_no), "\"length\" must be an integer");
  }
  return len.get<TokenCount>();
}

}  // namespace

std::string_view to_string(PackState state) {
  switch (state) {
    case PackState::kSlim:
      return "slim";
    case PackState::kMix:
      return "mix";
    case PackState::kPack:
      return "pack";
  }
  return "?";
}

PackState pack_state_from_string(std::string_view name) {
  if (name == "slim") return PackState::kSlim;
  if (name == "mix") return PackState::kMix;
  if (name == "pack") return PackState::kPack;
  throw InvalidInput("unknown pack state '" + std::string(name) + "'");
}

TokenCount MicroPack::tokens() const {
  TokenCount n = 0;
  for (const auto& s : slices) n += s.length();
  return n;
}

TokenCount GlobalBatch::total_tokens() const {
  TokenCount n = 0;
  for (const auto& s : samples) n += s.length;
  return n;
}

void LengthDistributionSpec::validate() const {
  if (!(tail_fraction >= 0.0 && tail_fraction < 1.0)) {
    throw InvalidInput("tail_fraction must lie in [0, 1)");
  }
  if (min_len < 1) throw InvalidInput("min_len must be >= 1");
  if (max_len < min_len) throw InvalidInput("max_len must be >= min_len");
  if (!(body_sigma >= 0.0) || !std::isfinite(body_mu)) {
    throw InvalidInput("log-normal body needs finite mu and sigma >= 0");
  }
  if (tail_fraction > 0.0 && (!(tail_scale > 0.0) || !(tail_alpha > 0.0))) {
    throw InvalidInput("Pareto tail needs positive scale and alpha");
  }
}

LengthDistributionSpec reference_length_spec() {
  LengthDistributionSpec spec;
  spec.body_mu = 6.0;  // median ~400 tokens
  spec.body_sigma = 1.0;
  spec.tail_scale = 12288.0;
  spec.tail_alpha = 1.3;
  spec.tail_fraction = 0.01;
  spec.min_len = 64;
  spec.max_len = 131072;
  return spec;
}

SampleIndex::SampleIndex(const std::vector<Sample>& samples) {
  by_id_.reserve(samples.size());
  for (const auto& s : samples) {
    if (!by_id_.emplace(s.id, s).second) {
      throw InvalidInput("duplicate sample id " + std::to_string(s.id));
    }
  }
}

const Sample& SampleIndex::at(SampleId id) const {
  auto it = by_id_.find(id);
  if (it == by_id_.end()) throw InvalidInput("unknown sample id " + std::to_string(id));
  return it->second;
}

ManifestFormat manifest_format_from_string(std::string_view name) {
  if (name == "plain") return ManifestFormat::kPlain;
  if (name == "jsonl") return ManifestFormat::kJsonl;
  throw InvalidInput("unknown manifest format '" + std::string(name) + "'");
}

GlobalBatch load_lengths(std::istream& in, ManifestFormat format, std::string source) {
  GlobalBatch batch;
  batch.source = std::move(source);
  std::string raw;
  int line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    const std::string text = trim(raw);
    if (text.empty()) continue;
    const TokenCount len =
        format == ManifestFormat::kPlain ? parse_plain(text, line_no) : parse_jsonl(text, line_no);
    if (len <= 0) {
      throw ParseError(line_ref(line_no), "length must be positive, got " + std::to_string(len));
    }
    batch.samples.push_back({static_cast<SampleId>(batch.samples.size()), len, 1});
  }
  if (batch.samples.empty()) throw ParseError("line 1", "manifest contains no samples");
  return batch;
}

void write_lengths(std::ostream& out, const GlobalBatch& batch, ManifestFormat format) {
  for (const auto& s : batch.samples) {
    if (format == ManifestFormat::kPlain) {
      out << s.length << '\n';
    } else {
      out << "{\"length\": " << s.length << "}\n";
    }
  }
}

GlobalBatch generate_synthetic(const LengthDistributionSpec& spec, std::uint64_t seed, int count) {
  spec.validate();
  if (count < 1) throw InvalidInput("count must be >= 1");
  GlobalBatch batch;
  batch.source = "synthetic:seed=" + std::to_string(seed);
  batch.samples.reserve(static_cast<std::size_t>(count));
  for (int i = 0; i < count; ++i) {
    SampleStream rng(seed, static_cast<std::uint64_t>(i));
    const double pick = rng.uniform();
    double len = 0.0;
    if (pick < spec.tail_fraction) {
      len = spec.tail_scale / std::pow(rng.uniform(), 1.0 / spec.tail_alpha);
    } else {
      const double u1 = rng.uniform();
      const double u2 = rng.uniform();
      const double z = std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
      len = std::exp(spec.body_mu + spec.body_sigma * z);
    }
    const double clamped = std::clamp(len, static_cast<double>(spec.min_len),
                                      static_cast<double>(spec.max_len));
    batch.samples.push_back({i, static_cast<TokenCount>(std::llround(clamped)), 1});
  }
  return batch;
}

PackState classify_state(const std::vector<Slice>& slices, const SampleIndex& samples) {
  if (slices.empty()) throw InvalidInput("cannot classify an empty MicroPack");
  bool all_whole = true;
  bool one_sample = true;
  for (const auto& s : slices) {
    const Sample& owner = samples.at(s.sample_id);
    if (s.start != 0 || s.end != owner.length) all_whole = false;
    if (s.sample_id != slices.front().sample_id) one_sample = false;
  }
  if (all_whole) return PackState::kPack;
  if (one_sample) return PackState::kSlim;
  return PackState::kMix;
}

SliceCost slice_cost(const ModelShape& model, const Sample& sample, TokenCount start,
                     TokenCount end) {
  if (start < 0 || end <= start || end > sample.length) {
    throw InvalidInput("slice [" + std::to_string(start) + ", " + std::to_string(end) +
                       ") outside sample " + std::to_string(sample.id));
  }
  if (sample.cp_degree == 1) return slice_forward_flops(model, start, end - start);
  const SliceCost hi = prefix_forward_flops(model, end);
  const SliceCost lo = prefix_forward_flops(model, start);
  const Flops g = sample.cp_degree;
  return {hi.attn / g - lo.attn / g, hi.linear / g - lo.linear / g};
}

std::int64_t slice_bytes(const Sample& sample, TokenCount start, TokenCount end,
                         std::int64_t bytes_per_token) {
  const std::int64_t g = sample.cp_degree;
  return (end * bytes_per_token) / g - (start * bytes_per_token) / g;
}

std::string check_stream(const std::vector<MicroPack>& packs, const std::vector<Sample>& samples,
                         SliceOrder order) {
  std::map<SampleId, TokenCount> length;
  for (const auto& s : samples) length[s.id] = s.length;
  // Next expected boundary per sample: ascending streams move `start` up from
  // 0, descending streams move `end` down from the sample length.
  std::map<SampleId, TokenCount> cursor;
  for (const auto& [id, len] : length) cursor[id] = order == SliceOrder::kAscending ? 0 : len;

  std::ostringstream err;
  for (std::size_t p = 0; p < packs.size(); ++p) {
    std::map<SampleId, int> seen;
    for (const auto& sl : packs[p].slices) {
      auto it = length.find(sl.sample_id);
      if (it == length.end()) {
        err << "pack " << p << " references unknown sample " << sl.sample_id;
        return err.str();
      }
      if (sl.start < 0 || sl.end <= sl.start || sl.end > it->second) {
        err << "pack " << p << " has invalid slice [" << sl.start << ", " << sl.end
            << ") of sample " << sl.sample_id;
        return err.str();
      }
      if (++seen[sl.sample_id] > 1) {
        err << "pack " << p << " holds sample " << sl.sample_id << " more than once";
        return err.str();
      }
      TokenCount& c = cursor[sl.sample_id];
      if (order == SliceOrder::kAscending) {
        if (sl.start != c) {
          err << "sample " << sl.sample_id << " slice at " << sl.start << " in pack " << p
              << " expected start " << c;
          return err.str();
        }
        c = sl.end;
      } else {
        if (sl.end != c) {
          err << "sample " << sl.sample_id << " slice ending at " << sl.end << " in pack " << p
              << " expected end " << c;
          return err.str();
        }
        c = sl.start;
      }
    }
  }
  for (const auto& [id, len] : length) {
    const TokenCount done = order == SliceOrder::kAscending ? len : 0;
    if (cursor[id] != done) {
      err << "sample " << id << " not fully covered (cursor " << cursor[id] << ")";
      return err.str();
    }
  }
  return {};
}

}  // namespace micropack
