// SPDX-License-Identifier: Apache-2.0

#include "seats/allocator.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

namespace seats {

std::int64_t BudgetPlan::total_v() const { return std::accumulate(b_v.begin(), b_v.end(), std::int64_t{0}); }
std::int64_t BudgetPlan::total_a() const { return std::accumulate(b_a.begin(), b_a.end(), std::int64_t{0}); }
std::int64_t BudgetPlan::total() const { return std::accumulate(b.begin(), b.end(), std::int64_t{0}); }

std::vector<std::int64_t> apportion(std::span<const double> shares, std::span<const std::int64_t> caps,
                                    std::int64_t total, std::span<const double> priority) {
    const auto n = shares.size();
    if (caps.size() != n || priority.size() != n) {
        throw Error("apportion: shares, caps and priority differ in length");
    }
    const auto capacity = std::accumulate(caps.begin(), caps.end(), std::int64_t{0});
    if (total > capacity) {
        std::ostringstream os;
        os << "budget " << total << " exceeds capacity " << capacity;
        throw InfeasibleError(os.str());
    }
    std::vector<double> quota(shares.begin(), shares.end());
    std::vector<char> capped(n, 0);

    // Spill quota above caps onto uncapped entries until nothing overflows.
    for (;;) {
        double excess = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            if (!capped[i] && quota[i] >= static_cast<double>(caps[i])) {
                excess += quota[i] - static_cast<double>(caps[i]);
                quota[i] = static_cast<double>(caps[i]);
                capped[i] = 1;
            }
        }
        if (excess <= 0.0) {
            break;
        }
        double weight = 0.0;
        double spare = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            if (!capped[i]) {
                weight += priority[i];
                spare += static_cast<double>(caps[i]) - quota[i];
            }
        }
        if (spare <= 0.0) {
            break;
        }
        for (std::size_t i = 0; i < n; ++i) {
            if (capped[i]) {
                continue;
            }
            quota[i] += weight > 0.0 ? excess * priority[i] / weight
                                     : excess * (static_cast<double>(caps[i]) - quota[i]) / spare;
        }
    }

    std::vector<std::int64_t> out(n);
    std::int64_t assigned = 0;
    for (std::size_t i = 0; i < n; ++i) {
        out[i] = std::clamp<std::int64_t>(static_cast<std::int64_t>(std::floor(quota[i])), 0, caps[i]);
        assigned += out[i];
    }

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        const double ra = quota[a] - std::floor(quota[a]);
        const double rb = quota[b] - std::floor(quota[b]);
        if (ra != rb) {
            return ra > rb;
        }
        if (priority[a] != priority[b]) {
            return priority[a] > priority[b];
        }
        return a < b;
    });

    // Surplus (floors overshooting after a cap clamp) is taken back in
    // reverse order; shortfall is handed out in order, cycling if needed.
    while (assigned > total) {
        bool moved = false;
        for (auto it = order.rbegin(); it != order.rend() && assigned > total; ++it) {
            if (out[*it] > 0) {
                --out[*it];
                --assigned;
                moved = true;
            }
        }
        if (!moved) {
            break;
        }
    }
    while (assigned < total) {
        bool moved = false;
        for (std::size_t i : order) {
            if (assigned == total) {
                break;
            }
            if (out[i] < caps[i]) {
                ++out[i];
                ++assigned;
                moved = true;
            }
        }
        if (!moved) {
            throw InfeasibleError("apportion: could not place remaining units");
        }
    }
    return out;
}

BudgetPlan allocate_total(const RelevanceScores& rel, double r_v, double r_a, std::int64_t base_v,
                          std::int64_t base_a, const WindowLayout& current, std::int64_t total) {
    const auto windows = current.windows();
    if (rel.windows() != windows || rel.s_v.size() != windows || rel.s_a.size() != windows) {
        throw Error("allocate: relevance covers " + std::to_string(rel.windows()) + " windows, layout has " +
                    std::to_string(windows));
    }
    if (r_v < 0.0 || r_a < 0.0) {
        throw Error("allocate: ratios must be non-negative");
    }
    const double want_v = r_v * static_cast<double>(base_v);
    const double want_a = r_a * static_cast<double>(base_a);

    BudgetPlan plan;
    plan.target_real = want_v + want_a;
    plan.b_real.resize(windows);
    plan.b_v_real.resize(windows);
    plan.b_a_real.resize(windows);
    std::vector<double> frac_v(windows);
    for (std::size_t t = 0; t < windows; ++t) {
        const double bt = plan.target_real * rel.s[t];
        const double term_v = rel.s_v[t] * want_v;
        const double term_a = rel.s_a[t] * want_a;
        const double denom = term_v + term_a;
        if (denom > 0.0) {
            frac_v[t] = term_v / denom;
        } else {
            const auto cap = current.n_v[t] + current.n_a[t];
            frac_v[t] = cap > 0 ? static_cast<double>(current.n_v[t]) / static_cast<double>(cap) : 1.0;
        }
        plan.b_real[t] = bt;
        plan.b_v_real[t] = frac_v[t] * bt;
        plan.b_a_real[t] = bt - plan.b_v_real[t];
    }

    std::vector<std::int64_t> caps(windows);
    for (std::size_t t = 0; t < windows; ++t) {
        caps[t] = current.n_v[t] + current.n_a[t];
    }
    // Quotas are rescaled when the caller's total differs from the rounded target.
    std::vector<double> shares = plan.b_real;
    if (plan.target_real > 0.0) {
        const double scale = static_cast<double>(total) / plan.target_real;
        for (auto& x : shares) {
            x *= scale;
        }
    }
    plan.b = apportion(shares, caps, total, rel.s);

    plan.b_v.resize(windows);
    plan.b_a.resize(windows);
    for (std::size_t t = 0; t < windows; ++t) {
        const auto bt = static_cast<double>(plan.b[t]);
        const double shares[2] = {frac_v[t] * bt, (1.0 - frac_v[t]) * bt};
        const std::int64_t mod_caps[2] = {current.n_v[t], current.n_a[t]};
        // Visual wins equal remainders via the priority tie-break.
        const double prio[2] = {frac_v[t] + 1.0, 1.0 - frac_v[t]};
        const auto split = apportion(shares, mod_caps, plan.b[t], prio);
        plan.b_v[t] = split[0];
        plan.b_a[t] = split[1];
    }
    return plan;
}

BudgetPlan allocate(const RelevanceScores& rel, double r_v, double r_a, std::int64_t base_v, std::int64_t base_a,
                    const WindowLayout& current) {
    const double want = r_v * static_cast<double>(base_v) + r_a * static_cast<double>(base_a);
    return allocate_total(rel, r_v, r_a, base_v, base_a, current, std::llround(want));
}

BudgetPlan allocate(const RelevanceScores& rel, double r_v, double r_a, const WindowLayout& layout) {
    return allocate(rel, r_v, r_a, layout.total_visual(), layout.total_audio(), layout);
}

}  // namespace seats
