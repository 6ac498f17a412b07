// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <string>
#include <vector>

#include "seats/core.hpp"

namespace seats {

enum class Block { shallow, middle1, middle2, middle3, late };

const char* to_string(Block b);

/// Block of 1-based `layer` under `b`.
Block block_of(int layer, const LayerBoundaries& b);

/// Per-layer token-retention ratios of the block-wise decay schedule.
struct SchedulePlan {
    std::vector<double> per_layer_trr;  // index 0 is layer 1
    double delta = 0.0;
    double c = 0.0;
    double r_s = 0.0;
    std::array<double, 3> r_m{};
    LayerBoundaries boundaries;
    std::vector<int> drop_layers;  // 1-based layers where the ratio strictly decreases

    int layers() const { return static_cast<int>(per_layer_trr.size()); }
    double at(int layer) const { return per_layer_trr.at(static_cast<std::size_t>(layer - 1)); }
    double mean() const;
};

struct DeltaSolution {
    double delta = 0.0;
    double c = 0.0;
};

/// Closed-form decay scale for the budget constraint mean(trr) = R.
/// When lambda * R > 1 the shallow ratio is clipped to 1 and delta comes
/// from the bisection oracle instead. Throws InfeasibleError when no
/// non-increasing, non-negative schedule meets the budget.
DeltaSolution solve_delta(const ModelConfig& config, double ratio, double lambda);

/// Bisection on delta over [0, r_s] against the explicitly summed per-layer
/// mean. Shares no algebra with solve_delta.
double delta_oracle(const ModelConfig& config, double ratio, double lambda);

/// The constant C of the closed form (depends only on the boundaries).
double decay_constant(const LayerBoundaries& b);

SchedulePlan build_schedule(const ModelConfig& config, double ratio, double lambda);

/// Ratio 1 on every layer before the late block, 0 from it on. Used for
/// modalities that are not pruned inside the LLM.
SchedulePlan full_retention_schedule(const ModelConfig& config);

enum class AblationTarget { visual, audio, both };

struct AblationPlan {
    std::vector<double> trr_v;
    std::vector<double> trr_a;
};

/// Removes the targeted modality from `remove_at` (1-based) onward.
AblationPlan ablation_schedule(const ModelConfig& config, int remove_at, AblationTarget target);

}  // namespace seats
