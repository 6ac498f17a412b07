// SPDX-License-Identifier: Apache-2.0

#include "seats/selector.hpp"

#include <algorithm>
#include <numeric>

namespace seats {

std::vector<std::size_t> select_topk(std::span<const double> scores, std::size_t budget) {
    if (budget > scores.size()) {
        throw Error("select_topk: budget " + std::to_string(budget) + " exceeds group size " +
                    std::to_string(scores.size()));
    }
    std::vector<std::size_t> order(scores.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });
    order.resize(budget);
    std::sort(order.begin(), order.end());
    return order;
}

std::pair<TokenStream, LayerSelection> apply_budget(const TokenStream& stream, const BudgetPlan& plan,
                                                   std::span<const double> scores_v,
                                                   std::span<const double> scores_a, int layer) {
    const auto windows = plan.windows();
    const auto layout = stream.layout(windows);
    if (static_cast<std::int64_t>(scores_v.size()) != layout.total_visual() ||
        static_cast<std::int64_t>(scores_a.size()) != layout.total_audio()) {
        throw Error("apply_budget: score lengths do not match the stream");
    }
    if (static_cast<std::int64_t>(stream.count(Modality::visual)) != layout.total_visual() ||
        static_cast<std::int64_t>(stream.count(Modality::audio)) != layout.total_audio()) {
        throw Error("apply_budget: stream has tokens outside the plan's " + std::to_string(windows) + " windows");
    }
    for (std::size_t t = 0; t < windows; ++t) {
        if (plan.b_v[t] > layout.n_v[t] || plan.b_a[t] > layout.n_a[t] || plan.b_v[t] < 0 || plan.b_a[t] < 0) {
            throw Error("apply_budget: plan for window " + std::to_string(t) + " (" + std::to_string(plan.b_v[t]) +
                        ", " + std::to_string(plan.b_a[t]) + ") does not fit layout (" +
                        std::to_string(layout.n_v[t]) + ", " + std::to_string(layout.n_a[t]) + ")");
        }
    }

    // Per-modality running offsets into the score vectors.
    std::vector<std::size_t> visual_rank(stream.size(), 0);
    std::vector<std::size_t> audio_rank(stream.size(), 0);
    {
        std::size_t v = 0;
        std::size_t a = 0;
        for (std::size_t i = 0; i < stream.size(); ++i) {
            if (stream.modality[i] == Modality::visual) {
                visual_rank[i] = v++;
            } else if (stream.modality[i] == Modality::audio) {
                audio_rank[i] = a++;
            }
        }
    }

    std::vector<char> keep(stream.size(), 0);
    LayerSelection sel;
    sel.layer = layer;
    sel.dropped.assign(windows, {0, 0});
    for (std::size_t t = 0; t < windows; ++t) {
        for (Modality m : {Modality::visual, Modality::audio}) {
            const auto rows = stream.group(t, m);
            const auto& ranks = m == Modality::visual ? visual_rank : audio_rank;
            const auto scores = m == Modality::visual ? scores_v : scores_a;
            std::vector<double> group_scores(rows.size());
            for (std::size_t k = 0; k < rows.size(); ++k) {
                group_scores[k] = scores[ranks[rows[k]]];
            }
            const auto budget = static_cast<std::size_t>(m == Modality::visual ? plan.b_v[t] : plan.b_a[t]);
            for (auto local : select_topk(group_scores, budget)) {
                keep[rows[local]] = 1;
            }
            sel.dropped[t][static_cast<std::size_t>(m)] = static_cast<std::int64_t>(rows.size() - budget);
        }
    }

    std::vector<std::size_t> rows;
    for (std::size_t i = 0; i < stream.size(); ++i) {
        if (stream.modality[i] == Modality::text) {
            rows.push_back(i);
        } else if (keep[i]) {
            rows.push_back(i);
            sel.kept.push_back(stream.position[i]);
        }
    }
    return {stream.subset(rows), std::move(sel)};
}

TokenStream late_removal(const TokenStream& stream) {
    std::vector<std::size_t> rows;
    for (std::size_t i = 0; i < stream.size(); ++i) {
        if (stream.modality[i] == Modality::text) {
            rows.push_back(i);
        }
    }
    return stream.subset(rows);
}

}  // namespace seats
