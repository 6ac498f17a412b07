// SPDX-License-Identifier: Apache-2.0

#include "seats/cost.hpp"

#include <algorithm>

#include "seats/pipeline.hpp"

namespace seats {

double layer_flops(std::int64_t n, const ModelConfig& config) {
    if (n < 0) {
        throw Error("layer_flops: negative sequence length");
    }
    const auto nn = static_cast<double>(n);
    const auto d = static_cast<double>(config.d_model);
    const auto ff = static_cast<double>(config.d_ff);
    return 8.0 * nn * d * d + 4.0 * nn * nn * d + 6.0 * nn * d * ff;
}

CostReport sequence_flops(std::span<const std::int64_t> seq_len, std::int64_t full_len, const ModelConfig& config) {
    CostReport r;
    r.flops_per_layer.reserve(seq_len.size());
    for (auto n : seq_len) {
        const double f = layer_flops(n, config);
        r.flops_per_layer.push_back(f);
        r.flops_total += f;
        r.kv_tokens_per_layer.push_back(n);
        r.peak_kv_tokens = std::max(r.peak_kv_tokens, n);
    }
    r.full_flops = static_cast<double>(seq_len.size()) * layer_flops(full_len, config);
    r.ratio_vs_full = r.full_flops > 0.0 ? r.flops_total / r.full_flops : 1.0;
    return r;
}

CostReport trace_flops(const PrefillTrace& trace, const ModelConfig& config) {
    return sequence_flops(trace.seq_len, trace.n_v + trace.n_a + trace.n_q, config);
}

}  // namespace seats
