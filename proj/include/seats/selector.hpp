// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "seats/allocator.hpp"
#include "seats/core.hpp"

namespace seats {

struct LayerSelection {
    int layer = 0;
    std::vector<std::int64_t> kept;                        // original positions of surviving non-text tokens
    std::vector<std::array<std::int64_t, 2>> dropped;      // [t][visual, audio]
};

/// Indices of the `budget` highest scores, ties to the lower index, returned
/// in ascending index order.
std::vector<std::size_t> select_topk(std::span<const double> scores, std::size_t budget);

/// Applies `plan` window by window: keeps the top-B_v visual and top-B_a
/// audio tokens of each window by score. `scores_v` / `scores_a` are per-token
/// scores over the stream's visual / audio rows in storage order.
std::pair<TokenStream, LayerSelection> apply_budget(const TokenStream& stream, const BudgetPlan& plan,
                                                   std::span<const double> scores_v,
                                                   std::span<const double> scores_a, int layer = 0);

/// Drops every visual and audio row.
TokenStream late_removal(const TokenStream& stream);

}  // namespace seats
