// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <span>
#include <vector>

#include "seats/core.hpp"

namespace seats {

/// Per-token non-negative saliency weights for one (window, modality) group.
using SaliencyVector = std::vector<double>;

/// Averages H row-stochastic n x n attention maps (one per head).
Matrix average_heads(std::span<const Matrix> heads);

/// value[j] = mean over rows i of attn(i, j): the attention token j receives.
SaliencyVector mean_received_attention(const Matrix& attn);

/// softmax_i(scale * <query, keys[i]>).
std::vector<double> query_scores(std::span<const float> query, const Matrix& keys, double scale);

/// Softmax of `logits / tau`, numerically stabilised.
std::vector<double> tempered_softmax(std::span<const double> logits, double tau);

struct RelevanceScores {
    std::vector<double> s_v;
    std::vector<double> s_a;
    std::vector<double> s;
    double tau = 0.0;

    std::size_t windows() const { return s.size(); }
};

/// Combined per-window weight: the mean of the two modality weights where
/// both are present, the present one's weight otherwise; renormalized to sum
/// to 1 when some windows lack a modality that others have.
std::vector<double> combine_window_weights(std::span<const double> s_v, std::span<const double> s_a,
                                           const WindowLayout& layout);

/// Window-level query relevance. `scores_v` / `scores_a` hold per-token
/// attention probabilities in storage order, grouped by window as in
/// `layout`. Windows lacking a modality get weight 0 for it and are left out
/// of that modality's softmax; their combined weight is the present
/// modality's weight, and the combined vector is renormalized to sum to 1.
RelevanceScores window_relevance(std::span<const double> scores_v, std::span<const double> scores_a,
                                 const WindowLayout& layout, double tau);

}  // namespace seats
