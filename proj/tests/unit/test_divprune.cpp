// SPDX-License-Identifier: Apache-2.0

#include <algorithm>
#include <random>
#include <set>

#include "doctest.h"
#include "oracles.hpp"
#include "seats/divprune.hpp"

using namespace seats;

TEST_CASE("cosine distance") {
    const std::vector<float> a{1, 0}, b{0, 1}, c{2, 0}, z{0, 0};
    CHECK(cosine_distance(a, b) == doctest::Approx(1.0));
    CHECK(cosine_distance(a, c) == doctest::Approx(0.0));
    CHECK(cosine_distance(a, z) == 1.0);
}

TEST_CASE("greedy_maxmin small cases") {
    SUBCASE("k = n is the identity") {
        std::mt19937_64 rng(2);
        const auto m = oracle::random_matrix(rng, 6, 3);
        auto r = greedy_maxmin(m, std::vector<double>(6, 1.0), 6);
        std::sort(r.picks.begin(), r.picks.end());
        CHECK(r.picks == std::vector<std::size_t>{0, 1, 2, 3, 4, 5});
    }
    SUBCASE("three identical plus one orthogonal") {
        Matrix m(4, 2, {1, 0, 1, 0, 0, 1, 1, 0});
        const auto r = greedy_maxmin(m, std::vector<double>(4, 1.0), 2);
        std::set<std::size_t> picked(r.picks.begin(), r.picks.end());
        CHECK(picked.size() == 2);
        CHECK(picked.count(2) == 1);
        // all six pairs, checked exhaustively: only pairs containing 2 have distance 1
        for (std::size_t i = 0; i < 4; ++i)
            for (std::size_t j = i + 1; j < 4; ++j)
                CHECK((oracle::cosine_distance(m.row(i), m.row(j)) > 0.5) == (i == 2 || j == 2));
    }
    SUBCASE("zero-norm rows are reported") {
        Matrix m(3, 2, {1, 0, 0, 0, 0, 1});
        const auto r = greedy_maxmin(m, std::vector<double>(3, 1.0), 2);
        CHECK(r.zero_norm_rows == std::vector<std::size_t>{1});
    }
    SUBCASE("k > n is rejected") {
        CHECK_THROWS_AS(greedy_maxmin(Matrix(2, 2), std::vector<double>(2, 1.0), 3), Error);
    }
    SUBCASE("weights must match rows") {
        CHECK_THROWS_AS(greedy_maxmin(Matrix(2, 2), std::vector<double>(3, 1.0), 1), Error);
    }
}

TEST_CASE("greedy_maxmin per-step exhaustive check") {
    std::mt19937_64 rng(31);
    std::uniform_int_distribution<int> nd(2, 10);
    std::uniform_real_distribution<double> wd(0.05, 1.0);
    for (int trial = 0; trial < 300; ++trial) {
        const std::size_t n = nd(rng);
        const std::size_t k = std::min<std::size_t>(n, 1 + trial % 4);
        const auto z = oracle::random_matrix(rng, n, 3);
        std::vector<double> w(n);
        for (auto& v : w) v = wd(rng);
        const auto r = greedy_maxmin(z, w, k);
        REQUIRE(r.picks.size() == k);
        if (k == n) continue;
        double best_iso = -1;
        for (std::size_t i = 0; i < n; ++i) best_iso = std::max(best_iso, oracle::isolation(z, w, i));
        CHECK(oracle::isolation(z, w, r.picks[0]) == best_iso);
        for (std::size_t step = 1; step < k; ++step) {
            const std::vector<std::size_t> prefix(r.picks.begin(), r.picks.begin() + step);
            double best = -1;
            for (std::size_t j = 0; j < n; ++j)
                if (std::find(prefix.begin(), prefix.end(), j) == prefix.end())
                    best = std::max(best, oracle::min_weighted_distance(z, w, prefix, j));
            CHECK(std::abs(oracle::min_weighted_distance(z, w, prefix, r.picks[step]) - best) < 1e-12);
        }
        const auto plain = greedy_maxmin(z, std::vector<double>(n, 1.0), k);
        CHECK(plain.picks == oracle::unweighted_maxmin(z, k));
    }
}

TEST_CASE("group keep count") {
    CHECK(group_keep_count(0.42, 288) == 120);
    CHECK(group_keep_count(0.91, 50) == 45);
    CHECK(group_keep_count(0.5, 4) == 2);
    CHECK(group_keep_count(0.01, 3) == 1);
    CHECK(group_keep_count(0.0, 3) == 0);
    CHECK(group_keep_count(0.7, 0) == 0);
    CHECK(group_keep_count(1.0, 7) == 7);
}

namespace {

RetentionSpec spec_of(double rv, double ra, double lambda) {
    RetentionSpec s;
    s.ratio = rv;
    s.ratio_v = rv;
    s.ratio_a = ra;
    s.lambda = lambda;
    return s;
}

}  // namespace

TEST_CASE("win_div_prune counts") {
    std::mt19937_64 rng(8);
    SUBCASE("clipped ratios give the identity") {
        const auto layout = WindowLayout::uniform(3, 5, 2);
        const auto s = oracle::make_stream(rng, layout, 4, 6);
        const auto r = win_div_prune(s, layout, {}, spec_of(0.8, 0.9, 1.4));
        CHECK(r.kept.size() == s.size());
    }
    SUBCASE("two windows at one half") {
        const auto layout = WindowLayout::uniform(2, 4, 2);
        const auto s = oracle::make_stream(rng, layout, 3, 6);
        const auto r = win_div_prune(s, layout, {}, spec_of(0.5, 0.5, 1.0));
        CHECK(r.per_window_kept[0] == std::array<std::int64_t, 2>{2, 1});
        CHECK(r.per_window_kept[1] == std::array<std::int64_t, 2>{2, 1});
        CHECK(r.kept_of(Modality::visual) + r.kept_of(Modality::audio) == 6);
        CHECK(r.kept.size() == 9);
    }
    SUBCASE("28-layer defaults per window") {
        const auto layout = WindowLayout::uniform(2, 288, 50);
        const auto s = oracle::make_stream(rng, layout, 8, 16);
        const auto r = win_div_prune(s, layout, {}, spec_of(0.30, 0.65, 1.4), 4);
        for (const auto& w : r.per_window_kept) {
            CHECK(w[0] == std::int64_t(std::floor(0.42 * 288 + 1e-9)));
            CHECK(w[0] == 120);
            CHECK(w[1] == 45);
        }
        // independent count from the kept rows
        std::int64_t v = 0, a = 0, q = 0;
        for (auto row : r.kept) {
            v += s.modality[row] == Modality::visual;
            a += s.modality[row] == Modality::audio;
            q += s.modality[row] == Modality::text;
        }
        CHECK(v == 240);
        CHECK(a == 90);
        CHECK(q == 8);
    }
}

TEST_CASE("win_div_prune determinism, locality, ordering") {
    std::mt19937_64 rng(19);
    const WindowLayout layout{{9, 4, 7}, {3, 0, 5}};
    const auto s = oracle::make_stream(rng, layout, 3, 5);
    GroupSaliency sal;
    std::uniform_real_distribution<double> u(0.1, 1.0);
    for (std::int32_t t = 0; t < 3; ++t) {
        SaliencyVector v(static_cast<std::size_t>(layout.n_v[t]));
        for (auto& x : v) x = u(rng);
        sal[{t, Modality::visual}] = v;
    }
    const auto spec = spec_of(0.3, 0.4, 1.4);
    const auto base = win_div_prune(s, layout, sal, spec, 1);
    for (unsigned threads : {2u, 3u, 8u}) {
        const auto r = win_div_prune(s, layout, sal, spec, threads);
        CHECK(r.kept == base.kept);
    }
    CHECK(std::is_sorted(base.kept.begin(), base.kept.end()));
    CHECK(std::adjacent_find(base.kept.begin(), base.kept.end()) == base.kept.end());

    // perturb window 2's embeddings; windows 0 and 1 keep the same rows
    auto p = s;
    for (std::size_t i = 0; i < p.size(); ++i)
        if (p.window_id[i] == 2)
            for (auto& x : p.embeddings.row(i)) x = -x * 3.0f + 1.0f;
    const auto rp = win_div_prune(p, layout, sal, spec);
    auto in_window = [&](const SelectionResult& r, std::int32_t t) {
        std::vector<std::size_t> out;
        for (auto row : r.kept)
            if (s.window_id[row] == t) out.push_back(row);
        return out;
    };
    CHECK(in_window(rp, 0) == in_window(base, 0));
    CHECK(in_window(rp, 1) == in_window(base, 1));

    // rounding slack: under one token per non-empty group (5 here)
    const double target = std::min(1.0, 1.4 * 0.3) * 20 + std::min(1.0, 1.4 * 0.4) * 8;
    const double kept = double(base.kept_of(Modality::visual) + base.kept_of(Modality::audio));
    CHECK(std::abs(kept - target) < 5.0);
}

TEST_CASE("win_div_prune rejects an invalid stream") {
    std::mt19937_64 rng(1);
    const auto layout = WindowLayout::uniform(2, 2, 2);
    const auto s = oracle::make_stream(rng, layout, 1, 2);
    CHECK_THROWS_AS(win_div_prune(s, WindowLayout::uniform(2, 3, 2), {}, spec_of(0.3, 0.3, 1.4)), Error);
}
