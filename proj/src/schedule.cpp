// SPDX-License-Identifier: Apache-2.0

#include "seats/schedule.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <sstream>

namespace seats {

namespace {

constexpr double kE = std::numbers::e;

// Tolerance under which a negative r_m3 counts as zero.
constexpr double kFeasibilitySlack = 1e-12;

std::vector<double> expand(const ModelConfig& config, double r_s, double delta) {
    const auto& b = config.boundaries;
    const double r1 = r_s - delta;
    const double r2 = r1 - delta * kE;
    const double r3 = r2 - delta * kE * kE;
    std::vector<double> trr(static_cast<std::size_t>(config.layers));
    for (int layer = 1; layer <= config.layers; ++layer) {
        double r = 0.0;
        switch (block_of(layer, b)) {
        case Block::shallow:
            r = r_s;
            break;
        case Block::middle1:
            r = r1;
            break;
        case Block::middle2:
            r = r2;
            break;
        case Block::middle3:
            r = r3;
            break;
        case Block::late:
            r = 0.0;
            break;
        }
        trr[static_cast<std::size_t>(layer - 1)] = r;
    }
    return trr;
}

double summed_mean(const std::vector<double>& trr) {
    double sum = 0.0;
    for (double r : trr) {
        sum += r;
    }
    return sum / static_cast<double>(trr.size());
}

double shallow_ratio(double ratio, double lambda) { return std::min(1.0, lambda * ratio); }

void check_inputs(const ModelConfig& config, double ratio, double lambda) {
    config.validate();
    if (!(ratio >= 0.0 && ratio <= 1.0)) {
        throw Error("schedule: R must lie in [0, 1]");
    }
    if (!(lambda >= 1.0)) {
        throw Error("schedule: lambda must be >= 1");
    }
}

void check_feasible(double r_s, double delta) {
    if (delta < 0.0) {
        std::ostringstream os;
        os << "infeasible schedule: delta = " << delta
           << " < 0 (shallow ratio r_s = " << r_s << " cannot reach the budget before the late block)";
        throw InfeasibleError(os.str());
    }
    const double r_m3 = r_s - delta * (1.0 + kE + kE * kE);
    if (r_m3 < -kFeasibilitySlack) {
        std::ostringstream os;
        os << "infeasible schedule: r_m3 = " << r_m3 << " < 0 (r_s = " << r_s << ", delta = " << delta << ")";
        throw InfeasibleError(os.str());
    }
}

}  // namespace

const char* to_string(Block b) {
    switch (b) {
    case Block::shallow:
        return "shallow";
    case Block::middle1:
        return "middle1";
    case Block::middle2:
        return "middle2";
    case Block::middle3:
        return "middle3";
    case Block::late:
        return "late";
    }
    return "unknown";
}

Block block_of(int layer, const LayerBoundaries& b) {
    if (layer <= b.shallow_end) {
        return Block::shallow;
    }
    if (layer < b.mid1) {
        return Block::middle1;
    }
    if (layer < b.mid2) {
        return Block::middle2;
    }
    if (layer < b.late_start) {
        return Block::middle3;
    }
    return Block::late;
}

double SchedulePlan::mean() const { return summed_mean(per_layer_trr); }

double decay_constant(const LayerBoundaries& b) {
    return b.shallow_end + 1 + kE * b.mid1 + kE * kE * b.mid2 - (1.0 + kE + kE * kE) * b.late_start;
}

double delta_oracle(const ModelConfig& config, double ratio, double lambda) {
    check_inputs(config, ratio, lambda);
    if (ratio == 0.0) {
        return 0.0;
    }
    const double r_s = shallow_ratio(ratio, lambda);
    // mean(delta) is strictly decreasing; root must sit in [0, r_s].
    auto excess = [&](double delta) { return summed_mean(expand(config, r_s, delta)) - ratio; };
    double lo = 0.0;
    double hi = r_s;
    const double f_lo = excess(lo);
    const double f_hi = excess(hi);
    if (f_lo < -1e-12 || f_hi > 1e-12) {
        std::ostringstream os;
        os << "infeasible schedule: no delta in [0, " << r_s << "] meets R = " << ratio << " (mean at 0 is "
           << f_lo + ratio << ", at r_s is " << f_hi + ratio << ")";
        throw InfeasibleError(os.str());
    }
    double mid = 0.5 * (lo + hi);
    for (int it = 0; it < 200; ++it) {
        mid = 0.5 * (lo + hi);
        const double f = excess(mid);
        if (std::abs(f) <= 1e-15 || hi - lo <= 1e-17) {
            break;
        }
        if (f > 0.0) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    check_feasible(r_s, mid);
    return mid;
}

DeltaSolution solve_delta(const ModelConfig& config, double ratio, double lambda) {
    check_inputs(config, ratio, lambda);
    const double c = decay_constant(config.boundaries);
    if (ratio == 0.0) {
        return {0.0, c};
    }
    if (lambda * ratio > 1.0) {
        return {delta_oracle(config, ratio, lambda), c};
    }
    const auto& b = config.boundaries;
    const double delta = (config.layers - b.late_start * lambda + lambda) * ratio / c;
    check_feasible(lambda * ratio, delta);
    return {delta, c};
}

namespace {

SchedulePlan make_plan(const ModelConfig& config, double r_s, DeltaSolution sol) {
    SchedulePlan plan;
    plan.delta = sol.delta;
    plan.c = sol.c;
    plan.r_s = r_s;
    plan.r_m[0] = r_s - sol.delta;
    plan.r_m[1] = plan.r_m[0] - sol.delta * kE;
    plan.r_m[2] = std::max(plan.r_m[1] - sol.delta * kE * kE, 0.0);
    plan.boundaries = config.boundaries;
    plan.per_layer_trr = expand(config, r_s, sol.delta);
    for (auto& r : plan.per_layer_trr) {
        r = std::max(r, 0.0);
    }
    for (int layer = 2; layer <= config.layers; ++layer) {
        if (plan.at(layer) < plan.at(layer - 1)) {
            plan.drop_layers.push_back(layer);
        }
    }
    return plan;
}

}  // namespace

SchedulePlan build_schedule(const ModelConfig& config, double ratio, double lambda) {
    const auto sol = solve_delta(config, ratio, lambda);
    return make_plan(config, shallow_ratio(ratio, lambda), sol);
}

SchedulePlan full_retention_schedule(const ModelConfig& config) {
    config.validate();
    return make_plan(config, 1.0, DeltaSolution{0.0, decay_constant(config.boundaries)});
}

AblationPlan ablation_schedule(const ModelConfig& config, int remove_at, AblationTarget target) {
    if (remove_at < 1 || remove_at > config.layers) {
        throw Error("ablation_schedule: remove_at " + std::to_string(remove_at) + " outside [1, " +
                    std::to_string(config.layers) + "]");
    }
    const auto n = static_cast<std::size_t>(config.layers);
    AblationPlan plan{std::vector<double>(n, 1.0), std::vector<double>(n, 1.0)};
    for (auto l = static_cast<std::size_t>(remove_at - 1); l < n; ++l) {
        if (target != AblationTarget::audio) {
            plan.trr_v[l] = 0.0;
        }
        if (target != AblationTarget::visual) {
            plan.trr_a[l] = 0.0;
        }
    }
    return plan;
}

}  // namespace seats
