// SPDX-License-Identifier: Apache-2.0

#include "seats/pipeline.hpp"

#include <algorithm>
#include <cmath>

namespace seats {

std::vector<int> PrefillTrace::shrink_layers() const {
    std::vector<int> out;
    for (std::size_t l = 1; l < seq_len.size(); ++l) {
        if (seq_len[l] < seq_len[l - 1]) {
            out.push_back(static_cast<int>(l + 1));
        }
    }
    return out;
}

SchedulePlan modality_schedule(const ModelConfig& config, double ratio, double lambda) {
    if (ratio >= 1.0) {
        return full_retention_schedule(config);
    }
    return build_schedule(config, ratio, lambda);
}

namespace {

void record_layer(PrefillTrace& trace, const TokenStream& s) {
    trace.visual.push_back(static_cast<std::int64_t>(s.count(Modality::visual)));
    trace.audio.push_back(static_cast<std::int64_t>(s.count(Modality::audio)));
    trace.seq_len.push_back(static_cast<std::int64_t>(s.size()));
}

void split_scores(const TokenStream& s, const std::vector<double>& all, std::vector<double>& v,
                  std::vector<double>& a) {
    v.clear();
    a.clear();
    for (std::size_t i = 0; i < s.size(); ++i) {
        if (s.modality[i] == Modality::visual) {
            v.push_back(all[i]);
        } else if (s.modality[i] == Modality::audio) {
            a.push_back(all[i]);
        }
    }
}

}  // namespace

PipelineResult run_pipeline(const TokenStream& stream, std::size_t windows, const AttentionSource& attention,
                            const ModelConfig& config, const RetentionSpec& spec, const GroupSaliency& saliency,
                            unsigned threads) {
    config.validate();
    spec.validate();
    const auto layout = stream.layout(windows);

    PrefillTrace trace;
    trace.config = config;
    trace.spec = spec;
    trace.windows = windows;
    trace.n_v = layout.total_visual();
    trace.n_a = layout.total_audio();
    trace.n_q = static_cast<std::int64_t>(stream.count(Modality::text));
    trace.attention_source = attention.describe();
    trace.schedule_v = modality_schedule(config, spec.ratio_v, spec.lambda);
    trace.schedule_a = modality_schedule(config, spec.ratio_a, spec.lambda);

    // Stage I.
    const GroupSaliency weights = saliency.empty() ? encoder_saliency(attention, stream, windows) : saliency;
    RetentionSpec stage1_spec = spec;
    if (spec.ratio_v >= 1.0) {
        stage1_spec.ratio_v = 1.0;
    }
    if (spec.ratio_a >= 1.0) {
        stage1_spec.ratio_a = 1.0;
    }
    trace.stage1 = win_div_prune(stream, layout, weights, stage1_spec, threads);
    TokenStream current = stream.subset(trace.stage1.kept);

    std::vector<double> scores_v;
    std::vector<double> scores_a;
    for (int layer = 1; layer <= config.layers; ++layer) {
        const double r_v = trace.schedule_v.at(layer);
        const double r_a = trace.schedule_a.at(layer);
        const bool drops_here = layer > 1 && (r_v < trace.schedule_v.at(layer - 1) ||
                                              r_a < trace.schedule_a.at(layer - 1));
        if (drops_here) {
            DropRecord rec;
            rec.layer = layer;
            rec.r_v = r_v;
            rec.r_a = r_a;
            if (layer >= config.boundaries.late_start) {
                rec.late = true;
                TokenStream next = late_removal(current);
                rec.selection.layer = layer;
                rec.selection.dropped.assign(windows, {0, 0});
                const auto before = current.layout(windows);
                for (std::size_t t = 0; t < windows; ++t) {
                    rec.selection.dropped[t] = {before.n_v[t], before.n_a[t]};
                }
                current = std::move(next);
            } else {
                const auto now = current.layout(windows);
                split_scores(current, attention.query_attention(layer, current), scores_v, scores_a);
                rec.relevance = window_relevance(scores_v, scores_a, now, spec.tau);
                const auto available = now.total_visual() + now.total_audio();
                const auto wanted = std::llround(r_v * static_cast<double>(trace.n_v) +
                                                 r_a * static_cast<double>(trace.n_a));
                rec.plan = allocate_total(rec.relevance, r_v, r_a, trace.n_v, trace.n_a, now,
                                          std::min<std::int64_t>(wanted, available));
                auto [next, sel] = apply_budget(current, rec.plan, scores_v, scores_a, layer);
                rec.selection = std::move(sel);
                current = std::move(next);
            }
            trace.drops.push_back(std::move(rec));
        }
        record_layer(trace, current);
    }
    return PipelineResult{std::move(current), std::move(trace)};
}

PipelineResult run_pipeline(const SynthSpec& synth, const ModelConfig& config, const RetentionSpec& spec,
                            unsigned threads) {
    const auto gen = synth_generate(synth);
    return run_pipeline(gen.stream, synth.windows, gen.attention, config, spec, {}, threads);
}

ModalityRetention mean_retention(const PrefillTrace& trace) {
    ModalityRetention out;
    const auto layers = static_cast<double>(trace.layers());
    if (layers == 0) {
        return out;
    }
    double sum_v = 0.0;
    double sum_a = 0.0;
    for (std::size_t l = 0; l < trace.seq_len.size(); ++l) {
        if (trace.n_v > 0) {
            sum_v += static_cast<double>(trace.visual[l]) / static_cast<double>(trace.n_v);
        }
        if (trace.n_a > 0) {
            sum_a += static_cast<double>(trace.audio[l]) / static_cast<double>(trace.n_a);
        }
    }
    out.visual = sum_v / layers;
    out.audio = sum_a / layers;
    return out;
}

}  // namespace seats
