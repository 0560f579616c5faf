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

#include "micropack/cost_model.h"

#include <cmath>
#include <limits>
#include <string>

#include "micropack/errors.h"

namespace micropack {
namespace {

using Wide = __int128;

constexpr Wide kFlopsMax = std::numeric_limits<Flops>::max();

Flops narrow(Wide value, const char* what) {
  if (value < 0 || value > kFlopsMax) {
    throw InvalidInput(std::string(what) + " overflows 64-bit FLOPs");
  }
  return static_cast<Flops>(value);
}

void require_positive(std::int64_t v, const char* field) {
  if (v <= 0) throw InvalidInput(std::string("ModelShape.") + field + " must be positive");
}

}  // namespace

void ModelShape::validate() const {
  require_positive(hidden_dim, "hidden_dim");
  require_positive(num_layers, "num_layers");
  require_positive(num_heads, "num_heads");
  require_positive(num_kv_groups, "num_kv_groups");
  require_positive(ffn_dim, "ffn_dim");
  require_positive(vocab_size, "vocab_size");
  if (num_heads % num_kv_groups != 0) {
    throw InvalidInput("ModelShape.num_kv_groups must divide num_heads");
  }
  if (hidden_dim % num_heads != 0) {
    throw InvalidInput("ModelShape.hidden_dim must be divisible by num_heads");
  }
}

std::int64_t ModelShape::params_per_layer() const {
  const std::int64_t h = hidden_dim;
  return h * h + 2 * h * kv_dim() + h * h + 3 * h * ffn_dim;
}

void CostMultipliers::validate() const {
  if (!(gemm >= 1.0) || !(attn >= 1.0) || !std::isfinite(gemm) || !std::isfinite(attn)) {
    throw InvalidInput("CostMultipliers must be finite and >= 1.0");
  }
}

void HardwareProfile::validate() const {
  if (!(peak_flops_per_sec > 0.0) || !std::isfinite(peak_flops_per_sec)) {
    throw InvalidInput("HardwareProfile.peak_flops_per_sec must be positive");
  }
  if (!(util_gemm > 0.0 && util_gemm <= 1.0) || !(util_attn > 0.0 && util_attn <= 1.0)) {
    throw InvalidInput("HardwareProfile utilizations must lie in (0, 1]");
  }
  if (activation_bytes_per_token_per_layer < 0 || kv_bytes_per_token_per_layer < 0 ||
      static_bytes_per_stage < 0) {
    throw InvalidInput("HardwareProfile byte constants must be non-negative");
  }
}

SliceCost slice_forward_flops(const ModelShape& model, TokenCount offset, TokenCount len) {
  if (len < 1) throw InvalidInput("slice length must be >= 1");
  if (offset < 0) throw InvalidInput("slice offset must be >= 0");
  const Wide l = len;
  const Wide pairs = l * offset + l * (l + 1) / 2;
  const Wide attn = Wide{4} * model.num_layers * model.hidden_dim * pairs;
  const Wide linear = Wide{2} * l * model.num_layers * model.params_per_layer();
  return {narrow(attn, "attention"), narrow(linear, "linear")};
}

SliceCost sample_forward_flops(const ModelShape& model, TokenCount length) {
  return slice_forward_flops(model, 0, length);
}

SliceCost prefix_forward_flops(const ModelShape& model, TokenCount end) {
  if (end == 0) return {};
  return slice_forward_flops(model, 0, end);
}

SliceCost backward_flops(const SliceCost& fwd, const CostMultipliers& mult) {
  auto scale = [](Flops x, double r) {
    const long double v = std::roundl(static_cast<long double>(r) * static_cast<long double>(x));
    if (v > static_cast<long double>(kFlopsMax)) {
      throw InvalidInput("backward FLOPs overflow 64 bits");
    }
    return static_cast<Flops>(v);
  };
  return {scale(fwd.attn, mult.attn), scale(fwd.linear, mult.gemm)};
}

double flops_to_seconds(const SliceCost& cost, const HardwareProfile& hw) {
  if (!(hw.peak_flops_per_sec > 0.0) || !(hw.util_attn > 0.0) || !(hw.util_gemm > 0.0)) {
    throw InvalidInput("flops_to_seconds needs positive peak and utilizations");
  }
  return static_cast<double>(cost.attn) / (hw.peak_flops_per_sec * hw.util_attn) +
         static_cast<double>(cost.linear) / (hw.peak_flops_per_sec * hw.util_gemm);
}

TokenCount max_slice_len_within_budget(const ModelShape& model, TokenCount offset,
                                       TokenCount remaining, Flops budget,
                                       TokenCount alignment) {
  if (remaining < 1) throw InvalidInput("remaining must be >= 1");
  if (alignment < 1) throw InvalidInput("alignment must be >= 1");
  if (budget < 0) throw InvalidInput("budget must be >= 0");
  auto fits = [&](TokenCount l) {
    return slice_forward_flops(model, offset, l).total() <= budget;
  };
  if (fits(remaining)) return remaining;
  // Cost is strictly increasing in l, so the fitting grid points form a
  // prefix of {alignment, 2 * alignment, ...}.
  TokenCount lo = 0;
  TokenCount hi = remaining / alignment;
  while (lo < hi) {
    const TokenCount mid = lo + (hi - lo + 1) / 2;
    if (fits(mid * alignment)) {
      lo = mid;
    } else {
      hi = mid - 1;
    }
  }
  return lo * alignment;
}

}  // namespace micropack
