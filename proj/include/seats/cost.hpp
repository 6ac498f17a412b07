// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "seats/core.hpp"

namespace seats {

struct PrefillTrace;

/// Identifier of the FLOPs formula below; printed with every report.
inline constexpr const char* kFlopsModel = "seats-flops-v1: 8*n*d^2 + 4*n^2*d + 6*n*d*d_ff per layer";

/// Prefill FLOPs of one decoder layer over `n` tokens: QKVO projections,
/// score and value matmuls, and a gated feed-forward, 2 flops per MAC.
double layer_flops(std::int64_t n, const ModelConfig& config);

struct CostReport {
    double flops_total = 0.0;
    std::vector<double> flops_per_layer;
    std::vector<std::int64_t> kv_tokens_per_layer;
    double full_flops = 0.0;
    double ratio_vs_full = 1.0;
    std::int64_t peak_kv_tokens = 0;
};

/// Costs a per-layer sequence-length profile against the unpruned profile
/// of `full_len` tokens at every layer.
CostReport sequence_flops(std::span<const std::int64_t> seq_len, std::int64_t full_len, const ModelConfig& config);

CostReport trace_flops(const PrefillTrace& trace, const ModelConfig& config);

}  // namespace seats
