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

#ifndef MICROPACK_WORKLOAD_H_
#define MICROPACK_WORKLOAD_H_

#include <cstdint>
#include <iosfwd>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "micropack/cost_model.h"

namespace micropack {

using SampleId = std::int64_t;

struct Sample {
  SampleId id = 0;
  TokenCount length = 0;
  // Context-parallel degree. A DP-Merge share of an outlier is represented as
  // the full-length sample with cp_degree = g: every member sees all token
  // positions but carries 1/g of the work and activations.
  std::int64_t cp_degree = 1;

  friend bool operator==(const Sample&, const Sample&) = default;
};

// Token span [start, end) of one sample.
struct Slice {
  SampleId sample_id = 0;
  TokenCount start = 0;
  TokenCount end = 0;

  TokenCount length() const { return end - start; }

  friend bool operator==(const Slice&, const Slice&) = default;
};

enum class PackState { kSlim, kMix, kPack };

std::string_view to_string(PackState state);
PackState pack_state_from_string(std::string_view name);

struct MicroPack {
  int index = 0;
  std::vector<Slice> slices;
  PackState state = PackState::kPack;
  SliceCost fwd_cost;
  SliceCost bwd_cost;

  TokenCount tokens() const;

  friend bool operator==(const MicroPack&, const MicroPack&) = default;
};

struct GlobalBatch {
  std::vector<Sample> samples;
  std::string source;

  TokenCount total_tokens() const;
};

// Log-normal body mixed with a Pareto tail, clamped to [min_len, max_len].
struct LengthDistributionSpec {
  double body_mu = 7.0;
  double body_sigma = 1.0;
  double tail_scale = 16384.0;
  double tail_alpha = 1.5;
  double tail_fraction = 0.0;
  TokenCount min_len = 1;
  TokenCount max_len = 131072;

  void validate() const;

  friend bool operator==(const LengthDistributionSpec&, const LengthDistributionSpec&) = default;
};

// The long-tail workload used for balance and throughput checks. With
// count = 10000 the longest 1% of samples carry more than 40% of the forward
// FLOPs of the Llama-7B shape.
LengthDistributionSpec reference_length_spec();
inline constexpr std::uint64_t kReferenceSeed = 20250501;
inline constexpr int kReferenceCount = 10000;

// Lookup from sample id to sample for one rank's stream.
class SampleIndex {
 public:
  SampleIndex() = default;
  explicit SampleIndex(const std::vector<Sample>& samples);

  const Sample& at(SampleId id) const;
  bool contains(SampleId id) const { return by_id_.count(id) != 0; }

 private:
  std::unordered_map<SampleId, Sample> by_id_;
};

enum class ManifestFormat { kPlain, kJsonl };

ManifestFormat manifest_format_from_string(std::string_view name);

// plain: one positive integer per line. jsonl: one object per line with an
// integer "length" field. Blank lines are skipped. Samples get ids 0..n-1 in
// file order. Throws ParseError naming the 1-based line.
GlobalBatch load_lengths(std::istream& in, ManifestFormat format, std::string source = {});

void write_lengths(std::ostream& out, const GlobalBatch& batch, ManifestFormat format);

// Deterministic for fixed (spec, seed, count). Each sample draws from its own
// counter-seeded stream, so the result does not depend on evaluation order.
GlobalBatch generate_synthetic(const LengthDistributionSpec& spec, std::uint64_t seed, int count);

// Slim: one sample, at least one proper subspan. Pack: only whole samples.
// Mix: anything else.
PackState classify_state(const std::vector<Slice>& slices, const SampleIndex& samples);

// Per-rank forward cost of [start, end) of `sample`, scaled by 1/cp_degree.
// Floors are taken on prefix costs, so costs of any partition of a sample
// still sum to the cost of the whole.
SliceCost slice_cost(const ModelShape& model, const Sample& sample, TokenCount start,
                     TokenCount end);

// Per-rank token count of [start, end) of `sample` times `bytes_per_token`,
// additive across partitions like slice_cost.
std::int64_t slice_bytes(const Sample& sample, TokenCount start, TokenCount end,
                         std::int64_t bytes_per_token);

// Order in which a pack stream visits each sample's tokens.
enum class SliceOrder {
  kAscending,   // forward streams: head slices first
  kDescending,  // backward streams: tail slices first (FILO)
};

// Checks that `packs` covers every token of every sample exactly once, that
// each sample's slices advance through the stream in `order`, and that within
// a pack a sample appears in at most one slice. Returns an empty string on
// success, otherwise a description of the first violation.
std::string check_stream(const std::vector<MicroPack>& packs, const std::vector<Sample>& samples,
                         SliceOrder order);

}  // namespace micropack

#endif  // MICROPACK_WORKLOAD_H_
