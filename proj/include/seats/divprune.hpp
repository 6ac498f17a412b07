// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <span>
#include <utility>
#include <vector>

#include "seats/core.hpp"
#include "seats/relevance.hpp"

namespace seats {

/// Cosine distance 1 - cos(a, b). A zero-norm row is at distance 1 from
/// everything.
double cosine_distance(std::span<const float> a, std::span<const float> b);

struct GreedyResult {
    std::vector<std::size_t> picks;           // in selection order, local indices
    std::vector<std::size_t> zero_norm_rows;  // rows whose cosine was undefined
};

/// Greedy max-min diversity selection over a saliency-weighted cosine
/// distance d(i, j) * w_j, where j is the candidate. The seed is the token
/// whose weighted distance to its nearest neighbour is largest; each later
/// pick maximises the minimum weighted distance to the picked set. Ties go
/// to the lowest row index.
GreedyResult greedy_maxmin(const Matrix& embeddings, std::span<const double> weights, std::size_t k);

/// Keep count for a group of `n` tokens at ratio `r`: floor(r * n), but at
/// least one token when n >= 1 and r > 0.
std::int64_t group_keep_count(double r, std::int64_t n);

using GroupKey = std::pair<std::int32_t, Modality>;

/// Saliency per (window, modality) group; missing groups use uniform weights.
using GroupSaliency = std::map<GroupKey, SaliencyVector>;

struct SelectionResult {
    std::vector<std::size_t> kept;  // stream row indices, ascending; text rows included
    std::vector<std::array<std::int64_t, 2>> per_window_kept;  // [t][visual, audio]
    std::vector<std::size_t> zero_norm_rows;                   // stream row indices

    std::int64_t kept_of(Modality m) const;
};

/// Stage I: per-window, per-modality weighted diversity selection at ratios
/// min(1, lambda * R_v) and min(1, lambda * R_a). Groups are independent and
/// are processed on up to `threads` workers; output does not depend on it.
SelectionResult win_div_prune(const TokenStream& stream, const WindowLayout& layout, const GroupSaliency& saliency,
                              const RetentionSpec& spec, unsigned threads = 1);

}  // namespace seats
