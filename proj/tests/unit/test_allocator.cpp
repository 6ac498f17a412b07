// SPDX-License-Identifier: Apache-2.0

#include <cmath>
#include <numeric>
#include <random>

#include "doctest.h"
#include "seats/allocator.hpp"

using namespace seats;

namespace {

RelevanceScores scores(std::vector<double> s_v, std::vector<double> s_a, const WindowLayout& layout) {
    RelevanceScores r;
    r.s = combine_window_weights(s_v, s_a, layout);
    r.s_v = std::move(s_v);
    r.s_a = std::move(s_a);
    r.tau = 0.1;
    return r;
}

std::vector<double> random_simplex(std::mt19937_64& rng, std::size_t n, const std::vector<bool>& present) {
    std::exponential_distribution<double> e(1.0);
    std::vector<double> v(n, 0.0);
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        if (present[i]) {
            v[i] = e(rng);
            s += v[i];
        }
    }
    if (s > 0.0)
        for (auto& x : v) x /= s;
    return v;
}

}  // namespace

TEST_CASE("apportion") {
    const std::vector<double> shares{1.5, 1.5, 1.0};
    const std::vector<std::int64_t> caps{5, 5, 5};
    const std::vector<double> prio{0.2, 0.5, 0.3};
    // equal remainders: higher priority wins
    CHECK(apportion(shares, caps, 4, prio) == std::vector<std::int64_t>{1, 2, 1});
    // capped entry spills to the others
    CHECK(apportion(std::vector<double>{4.0, 1.0}, std::vector<std::int64_t>{2, 9}, 5,
                    std::vector<double>{0.8, 0.2}) == std::vector<std::int64_t>{2, 3});
    CHECK_THROWS_AS(apportion(shares, caps, 16, prio), InfeasibleError);
    CHECK_THROWS_AS(apportion(shares, std::vector<std::int64_t>{1}, 1, prio), Error);
}

TEST_CASE("two-window hand example") {
    const auto layout = WindowLayout::uniform(2, 4, 2);
    const auto rel = scores({0.8, 0.2}, {0.5, 0.5}, layout);
    CHECK(rel.s[0] == doctest::Approx(0.65));
    const auto plan = allocate(rel, 0.5, 0.5, layout);

    // Scalar computation: target 0.5*8 + 0.5*4 = 6
    const double target = 6.0;
    const double b0 = target * 0.65, b1 = target * 0.35;
    CHECK(std::abs(plan.b_real[0] - b0) < 1e-12);
    CHECK(std::abs(plan.b_real[1] - b1) < 1e-12);
    const double v0 = 0.8 * 4.0 / (0.8 * 4.0 + 0.5 * 2.0) * b0;
    const double v1 = 0.2 * 4.0 / (0.2 * 4.0 + 0.5 * 2.0) * b1;
    CHECK(std::abs(plan.b_v_real[0] - v0) < 1e-12);
    CHECK(std::abs(plan.b_v_real[1] - v1) < 1e-12);
    CHECK(std::abs(plan.b_v_real[0] - 2.9714285714) < 1e-9);
    CHECK(std::abs(plan.b_a_real[1] - 1.1666666667) < 1e-9);

    // floors (3, 2), remainders (0.9, 0.1): the spare unit goes to window 0
    CHECK(plan.b == std::vector<std::int64_t>{4, 2});
    // window 0: 4 * 3.2/4.2 = 3.05 -> (3, 1); window 1: 2 * 0.8/1.8 = 0.89 -> (1, 1)
    CHECK(plan.b_v == std::vector<std::int64_t>{3, 1});
    CHECK(plan.b_a == std::vector<std::int64_t>{1, 1});
    CHECK(plan.total() == 6);
}

TEST_CASE("uniform relevance splits evenly") {
    const auto layout = WindowLayout::uniform(4, 100, 20);
    const auto rel = scores(std::vector<double>(4, 0.25), std::vector<double>(4, 0.25), layout);
    const auto plan = allocate(rel, 0.3, 0.5, layout);
    const double total = 0.3 * 400 + 0.5 * 80;
    for (std::size_t t = 0; t < 4; ++t) {
        CHECK(plan.b[t] == 40);
        CHECK(plan.b_v_real[t] / plan.b_real[t] == doctest::Approx(120.0 / total));
        CHECK(plan.b_v[t] == 30);
    }
}

TEST_CASE("audio-absent stream") {
    const auto layout = WindowLayout::uniform(3, 10, 0);
    const auto rel = scores({0.5, 0.3, 0.2}, {0.0, 0.0, 0.0}, layout);
    const auto plan = allocate(rel, 0.4, 0.7, layout);
    CHECK(plan.total() == 12);
    for (std::size_t t = 0; t < 3; ++t) {
        CHECK(plan.b_a[t] == 0);
        CHECK(plan.b_v[t] == plan.b[t]);
    }
}

TEST_CASE("cross-modal shift lets a modality exceed its own share") {
    const auto layout = WindowLayout::uniform(2, 50, 50);
    // visual is strongly concentrated in window 0, audio is spread evenly
    const auto rel = scores({0.99, 0.01}, {0.5, 0.5}, layout);
    const auto plan = allocate(rel, 0.3, 0.3, layout);
    CHECK(plan.total() == 60);
    CHECK(plan.b[0] > plan.b[1]);
    CHECK(plan.b_v[0] > plan.b_a[0]);
}

TEST_CASE("conservation, caps and the real identity on random draws") {
    std::mt19937_64 rng(123);
    std::uniform_int_distribution<int> cnt(0, 40);
    std::uniform_real_distribution<double> ur(0.0, 1.0);
    for (int trial = 0; trial < 3000; ++trial) {
        const std::size_t T = 1 + trial % 6;
        WindowLayout base;
        for (std::size_t t = 0; t < T; ++t) {
            base.n_v.push_back(trial % 7 == 0 ? 0 : cnt(rng));
            base.n_a.push_back(trial % 5 == 0 ? 0 : cnt(rng));
        }
        if (base.total_visual() + base.total_audio() == 0) continue;
        // current layout: some tokens already removed
        WindowLayout cur = base;
        for (std::size_t t = 0; t < T; ++t) {
            cur.n_v[t] = std::int64_t(std::ceil(double(base.n_v[t]) * (0.6 + 0.4 * ur(rng))));
            cur.n_a[t] = std::int64_t(std::ceil(double(base.n_a[t]) * (0.6 + 0.4 * ur(rng))));
        }
        std::vector<bool> pv(T), pa(T);
        for (std::size_t t = 0; t < T; ++t) {
            pv[t] = cur.n_v[t] > 0;
            pa[t] = cur.n_a[t] > 0;
        }
        const auto rel = scores(random_simplex(rng, T, pv), random_simplex(rng, T, pa), cur);
        const double r_v = 0.6 * ur(rng);
        const double r_a = 0.6 * ur(rng);
        const double want = r_v * double(base.total_visual()) + r_a * double(base.total_audio());
        const auto total = std::llround(want);
        if (total > cur.total_visual() + cur.total_audio()) {
            CHECK_THROWS_AS(allocate(rel, r_v, r_a, base.total_visual(), base.total_audio(), cur), InfeasibleError);
            continue;
        }
        const auto plan = allocate(rel, r_v, r_a, base.total_visual(), base.total_audio(), cur);
        CHECK(plan.total() == total);
        double real = 0.0;
        for (std::size_t t = 0; t < T; ++t) {
            CHECK(plan.b[t] == plan.b_v[t] + plan.b_a[t]);
            CHECK(plan.b_v[t] >= 0);
            CHECK(plan.b_a[t] >= 0);
            CHECK(plan.b_v[t] <= cur.n_v[t]);
            CHECK(plan.b_a[t] <= cur.n_a[t]);
            CHECK(std::abs(plan.b_v_real[t] + plan.b_a_real[t] - plan.b_real[t]) < 1e-9);
            real += plan.b_real[t];
        }
        CHECK(std::abs(real - want) < 1e-9);
    }
}

TEST_CASE("raising one window's relevance never lowers its budget when caps are slack") {
    std::mt19937_64 rng(5150);
    std::uniform_real_distribution<double> ur(0.0, 1.0);
    int violations = 0;
    for (int trial = 0; trial < 2000; ++trial) {
        const std::size_t T = 2 + trial % 5;
        const auto layout = WindowLayout::uniform(T, 400, 400);
        std::vector<bool> all(T, true);
        auto sv = random_simplex(rng, T, all);
        auto sa = random_simplex(rng, T, all);
        const auto before = allocate(scores(sv, sa, layout), 0.05, 0.05, layout);
        const std::size_t t = trial % T;
        const double bump = 1.0 + ur(rng);
        sv[t] *= bump;
        sa[t] *= bump;
        const double zv = std::accumulate(sv.begin(), sv.end(), 0.0);
        const double za = std::accumulate(sa.begin(), sa.end(), 0.0);
        for (auto& x : sv) x /= zv;
        for (auto& x : sa) x /= za;
        const auto after = allocate(scores(sv, sa, layout), 0.05, 0.05, layout);
        violations += after.b[t] < before.b[t];
    }
    CHECK(violations == 0);
}

TEST_CASE("allocate input errors") {
    const auto layout = WindowLayout::uniform(2, 3, 3);
    const auto rel = scores({0.5, 0.5}, {0.5, 0.5}, layout);
    CHECK_THROWS_AS(allocate(rel, 0.5, 0.5, WindowLayout::uniform(3, 3, 3)), Error);
    CHECK_THROWS_AS(allocate(rel, -0.1, 0.5, layout), Error);
}
