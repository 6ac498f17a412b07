// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <vector>

#include "seats/allocator.hpp"
#include "seats/core.hpp"
#include "seats/divprune.hpp"
#include "seats/relevance.hpp"
#include "seats/schedule.hpp"
#include "seats/selector.hpp"
#include "seats/synth.hpp"

namespace seats {

/// Everything that happened at one drop layer.
struct DropRecord {
    int layer = 0;
    double r_v = 0.0;
    double r_a = 0.0;
    bool late = false;  // full non-text removal
    RelevanceScores relevance;
    BudgetPlan plan;
    LayerSelection selection;
};

struct PrefillTrace {
    ModelConfig config;
    RetentionSpec spec;
    std::size_t windows = 0;
    std::int64_t n_v = 0;  // original counts
    std::int64_t n_a = 0;
    std::int64_t n_q = 0;

    // Input to each layer; index 0 is layer 1.
    std::vector<std::int64_t> seq_len;
    std::vector<std::int64_t> visual;
    std::vector<std::int64_t> audio;

    SelectionResult stage1;
    SchedulePlan schedule_v;
    SchedulePlan schedule_a;
    std::vector<DropRecord> drops;
    std::string attention_source;

    int layers() const { return static_cast<int>(seq_len.size()); }
    /// Layers whose input is shorter than the previous layer's.
    std::vector<int> shrink_layers() const;
};

struct PipelineResult {
    TokenStream final_stream;
    PrefillTrace trace;
};

/// Schedule for one modality ratio: the block-wise decay plan, or the full
/// retention plan when the ratio is 1.
SchedulePlan modality_schedule(const ModelConfig& config, double ratio, double lambda);

/// Stage I (weighted diversity pruning), Stage II at every layer where either
/// modality's ratio drops inside the middle block, Stage III at the late
/// block. Stage I saliency comes from `saliency` when non-empty, otherwise
/// from the source's encoder attention, otherwise uniform.
PipelineResult run_pipeline(const TokenStream& stream, std::size_t windows, const AttentionSource& attention,
                            const ModelConfig& config, const RetentionSpec& spec,
                            const GroupSaliency& saliency = {}, unsigned threads = 1);

/// Convenience: generate a synthetic stream and run it.
PipelineResult run_pipeline(const SynthSpec& synth, const ModelConfig& config, const RetentionSpec& spec,
                            unsigned threads = 1);

struct ModalityRetention {
    double visual = 0.0;
    double audio = 0.0;
};

/// Layer mean of retained / original tokens per modality (0 for an absent modality).
ModalityRetention mean_retention(const PrefillTrace& trace);

}  // namespace seats
