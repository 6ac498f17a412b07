// SPDX-License-Identifier: Apache-2.0

#include <algorithm>
#include <random>

#include "doctest.h"
#include "oracles.hpp"
#include "seats/selector.hpp"

using namespace seats;

TEST_CASE("select_topk") {
    CHECK(select_topk(std::vector<double>{0.3, 0.1, 0.2}, 3) == std::vector<std::size_t>{0, 1, 2});
    CHECK(select_topk(std::vector<double>{0.1, 0.5, 0.4}, 2) == std::vector<std::size_t>{1, 2});
    CHECK(select_topk(std::vector<double>{0.2, 0.2, 0.2}, 2) == std::vector<std::size_t>{0, 1});
    CHECK(select_topk(std::vector<double>{0.2, 0.2}, 0).empty());
    CHECK_THROWS_AS(select_topk(std::vector<double>{0.2}, 2), Error);

    std::mt19937_64 rng(3);
    std::uniform_int_distribution<int> coarse(0, 4);
    for (int trial = 0; trial < 500; ++trial) {
        const std::size_t n = 1 + trial % 8;
        std::vector<double> s(n);
        for (auto& x : s) x = coarse(rng) * 0.25;  // frequent ties
        const std::size_t k = trial % (n + 1);
        CHECK(select_topk(s, k) == oracle::best_subset(s, k));
    }
}

namespace {

struct Fixture {
    WindowLayout layout = WindowLayout::uniform(2, 4, 2);
    TokenStream stream;
    std::vector<double> sv{0.10, 0.30, 0.20, 0.05, 0.01, 0.02, 0.03, 0.04};
    std::vector<double> sa{0.06, 0.07, 0.09, 0.08};

    Fixture() {
        std::mt19937_64 rng(4);
        stream = oracle::make_stream(rng, layout, 3, 2);
    }
};

}  // namespace

TEST_CASE("apply_budget") {
    Fixture f;
    SUBCASE("full plan keeps everything") {
        BudgetPlan plan;
        plan.b = {6, 6};
        plan.b_v = {4, 4};
        plan.b_a = {2, 2};
        const auto [out, sel] = apply_budget(f.stream, plan, f.sv, f.sa, 5);
        CHECK(out == f.stream);
        CHECK(sel.layer == 5);
        CHECK(sel.dropped[0] == std::array<std::int64_t, 2>{0, 0});
    }
    SUBCASE("zero plan equals late removal") {
        BudgetPlan plan;
        plan.b = {0, 0};
        plan.b_v = {0, 0};
        plan.b_a = {0, 0};
        const auto [out, sel] = apply_budget(f.stream, plan, f.sv, f.sa);
        CHECK(out == late_removal(f.stream));
        CHECK(sel.kept.empty());
    }
    SUBCASE("plan from the allocator example matches per-window top-k") {
        BudgetPlan plan;
        plan.b = {4, 2};
        plan.b_v = {3, 1};
        plan.b_a = {1, 1};
        const auto [out, sel] = apply_budget(f.stream, plan, f.sv, f.sa);
        // rows: w0 v0..v3 a0 a1, w1 v4..v7 a2 a3, text
        std::vector<std::int64_t> expect;
        for (auto i : oracle::best_subset({0.10, 0.30, 0.20, 0.05}, 3)) expect.push_back(std::int64_t(i));
        for (auto i : oracle::best_subset({0.06, 0.07}, 1)) expect.push_back(4 + std::int64_t(i));
        for (auto i : oracle::best_subset({0.01, 0.02, 0.03, 0.04}, 1)) expect.push_back(6 + std::int64_t(i));
        for (auto i : oracle::best_subset({0.09, 0.08}, 1)) expect.push_back(10 + std::int64_t(i));
        std::sort(expect.begin(), expect.end());
        CHECK(sel.kept == expect);
        CHECK(out.size() == 6 + 3);
        CHECK(out.layout(2) == WindowLayout{{3, 1}, {1, 1}});
        CHECK(std::is_sorted(out.position.begin(), out.position.end()));
        CHECK(out.count(Modality::text) == 3);
        CHECK(sel.dropped[0] == std::array<std::int64_t, 2>{1, 1});
        CHECK(sel.dropped[1] == std::array<std::int64_t, 2>{3, 1});
    }
    SUBCASE("mismatched plan is rejected") {
        BudgetPlan plan;
        plan.b = {5, 0};
        plan.b_v = {5, 0};
        plan.b_a = {0, 0};
        CHECK_THROWS_AS(apply_budget(f.stream, plan, f.sv, f.sa), Error);
        plan.b_v = {4, 0};
        CHECK_THROWS_AS(apply_budget(f.stream, plan, std::vector<double>{0.1}, f.sa), Error);
    }
}

TEST_CASE("late removal") {
    std::mt19937_64 rng(6);
    const auto text_only = oracle::make_stream(rng, WindowLayout::uniform(1, 0, 0), 5, 3);
    CHECK(late_removal(text_only) == text_only);
    const auto mixed = oracle::make_stream(rng, WindowLayout::uniform(3, 4, 2), 7, 3);
    const auto once = late_removal(mixed);
    CHECK(once.size() == 7);
    CHECK(once.count(Modality::text) == 7);
    CHECK(late_removal(once) == once);
}
