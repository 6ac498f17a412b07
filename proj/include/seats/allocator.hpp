// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "seats/core.hpp"
#include "seats/relevance.hpp"

namespace seats {

/// Integer per-window, per-modality token budgets at one drop layer.
struct BudgetPlan {
    std::vector<std::int64_t> b;
    std::vector<std::int64_t> b_v;
    std::vector<std::int64_t> b_a;

    // Real-valued budgets before rounding and capping.
    std::vector<double> b_real;
    std::vector<double> b_v_real;
    std::vector<double> b_a_real;
    double target_real = 0.0;

    std::int64_t total_v() const;
    std::int64_t total_a() const;
    std::int64_t total() const;
    std::size_t windows() const { return b.size(); }
};

/// Largest-remainder apportionment of `total` integer units over `shares`
/// (real quotas that sum to about `total`), respecting per-entry `caps`.
/// Quota above a cap is re-spread over uncapped entries in proportion to
/// `priority`; leftover units after flooring go by (remainder desc,
/// priority desc, index asc). Throws InfeasibleError if total > sum(caps).
std::vector<std::int64_t> apportion(std::span<const double> shares, std::span<const std::int64_t> caps,
                                    std::int64_t total, std::span<const double> priority);

/// Top-down budget allocation. `base_v` / `base_a` are the modality totals the
/// ratios refer to (the original token counts); `current` is the layout as it
/// enters the drop layer and supplies the capacity caps.
BudgetPlan allocate(const RelevanceScores& rel, double r_v, double r_a, std::int64_t base_v, std::int64_t base_a,
                    const WindowLayout& current);

/// Same, with the ratios taken relative to `layout`'s own totals.
BudgetPlan allocate(const RelevanceScores& rel, double r_v, double r_a, const WindowLayout& layout);

/// Allocation with an explicit integer total instead of round(r_v N_v + r_a N_a).
BudgetPlan allocate_total(const RelevanceScores& rel, double r_v, double r_a, std::int64_t base_v,
                          std::int64_t base_a, const WindowLayout& current, std::int64_t total);

}  // namespace seats
