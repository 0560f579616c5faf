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

#ifndef MICROPACK_COST_MODEL_H_
#define MICROPACK_COST_MODEL_H_

#include <cstdint>

namespace micropack {

using Flops = std::int64_t;
using TokenCount = std::int64_t;

// Transformer dimensions needed for FLOPs and memory accounting.
struct ModelShape {
  std::int64_t hidden_dim = 0;
  std::int64_t num_layers = 0;
  std::int64_t num_heads = 0;
  // Equal to num_heads when grouped-query attention is not used.
  std::int64_t num_kv_groups = 0;
  std::int64_t ffn_dim = 0;
  std::int64_t vocab_size = 0;

  // Throws InvalidInput unless every field is positive, num_kv_groups
  // divides num_heads and num_heads divides hidden_dim.
  void validate() const;

  std::int64_t kv_dim() const { return hidden_dim * num_kv_groups / num_heads; }

  // Q, K, V, O projections plus a three-matrix gated FFN.
  std::int64_t params_per_layer() const;

  friend bool operator==(const ModelShape&, const ModelShape&) = default;
};

// Backward/forward cost ratios for GEMM and attention kernels.
struct CostMultipliers {
  double gemm = 2.0;
  double attn = 2.5;

  void validate() const;

  friend bool operator==(const CostMultipliers&, const CostMultipliers&) = default;
};

struct SliceCost {
  Flops attn = 0;
  Flops linear = 0;

  Flops total() const { return attn + linear; }

  SliceCost& operator+=(const SliceCost& other) {
    attn += other.attn;
    linear += other.linear;
    return *this;
  }
  friend SliceCost operator+(SliceCost a, const SliceCost& b) { return a += b; }
  friend SliceCost operator-(const SliceCost& a, const SliceCost& b) {
    return {a.attn - b.attn, a.linear - b.linear};
  }
  friend bool operator==(const SliceCost&, const SliceCost&) = default;
};

// Calibration constants turning FLOPs into seconds and tokens into bytes.
struct HardwareProfile {
  double peak_flops_per_sec = 0.0;
  double util_gemm = 1.0;
  double util_attn = 1.0;
  std::int64_t activation_bytes_per_token_per_layer = 0;
  std::int64_t kv_bytes_per_token_per_layer = 0;
  std::int64_t static_bytes_per_stage = 0;

  void validate() const;

  friend bool operator==(const HardwareProfile&, const HardwareProfile&) = default;
};

// Forward FLOPs of the token span [offset, offset + len) of one sample under
// causal attention. Query token q attends to q + 1 keys, so
//   attn   = 4 * layers * hidden * (len * offset + len * (len + 1) / 2)
//   linear = 2 * len * layers * params_per_layer
// Exact in integers; the cost of a contiguous partition of a sample sums to
// the cost of the whole sample. Throws InvalidInput for len < 1, offset < 0,
// or when the result does not fit in 64 bits.
SliceCost slice_forward_flops(const ModelShape& model, TokenCount offset, TokenCount len);

SliceCost sample_forward_flops(const ModelShape& model, TokenCount length);

// Cost of the prefix [0, end); zero for end == 0.
SliceCost prefix_forward_flops(const ModelShape& model, TokenCount end);

// Per-field round(multiplier * flops).
SliceCost backward_flops(const SliceCost& fwd, const CostMultipliers& mult);

double flops_to_seconds(const SliceCost& cost, const HardwareProfile& hw);

// Largest l <= remaining with forward cost of (offset, l) <= budget, where l
// is a multiple of `alignment` or equals `remaining`. Returns 0 when nothing
// fits.
TokenCount max_slice_len_within_budget(const ModelShape& model, TokenCount offset,
                                       TokenCount remaining, Flops budget,
                                       TokenCount alignment = 1);

}  // namespace micropack

#endif  // MICROPACK_COST_MODEL_H_
