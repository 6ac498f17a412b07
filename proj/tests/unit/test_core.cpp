// SPDX-License-Identifier: Apache-2.0

#include <random>

#include "doctest.h"
#include "oracles.hpp"
#include "seats/core.hpp"

using namespace seats;

namespace {

TokenStream tiny_stream() {
    std::mt19937_64 rng(3);
    return oracle::make_stream(rng, WindowLayout{{2, 1}, {1, 1}}, 2, 3);
}

bool mentions(const ValidationReport& r, const std::string& needle) {
    for (const auto& v : r.violations) {
        if (v.find(needle) != std::string::npos) {
            return true;
        }
    }
    return false;
}

}  // namespace

TEST_CASE("validate_stream accepts a consistent stream") {
    const auto s = tiny_stream();
    const auto report = validate_stream(s, WindowLayout{{2, 1}, {1, 1}});
    CHECK(report.ok());
    CHECK(s.size() == s.count(Modality::visual) + s.count(Modality::audio) + s.count(Modality::text));
}

TEST_CASE("validate_stream names a layout sum mismatch") {
    const auto s = tiny_stream();
    const auto report = validate_stream(s, WindowLayout{{2, 2}, {1, 1}});
    CHECK_FALSE(report.ok());
    CHECK(mentions(report, "visual sum"));
}

TEST_CASE("validate_stream names a text row with a window id") {
    auto s = tiny_stream();
    s.window_id.back() = 0;
    const auto report = validate_stream(s, WindowLayout{{2, 1}, {1, 1}});
    CHECK_FALSE(report.ok());
    CHECK(mentions(report, "row " + std::to_string(s.size() - 1) + ": text row carries window_id"));
}

TEST_CASE("validate_stream flags ordering and window violations") {
    const WindowLayout layout{{2, 1}, {1, 1}};
    SUBCASE("non-increasing position") {
        auto s = tiny_stream();
        s.position[2] = s.position[1];
        CHECK(mentions(validate_stream(s, layout), "not greater than previous position"));
    }
    SUBCASE("missing window id") {
        auto s = tiny_stream();
        s.window_id[0] = kNoWindow;
        CHECK(mentions(validate_stream(s, layout), "has no window_id"));
    }
    SUBCASE("decreasing window id within a modality") {
        auto s = tiny_stream();
        // rows: v0 v0 a0 v1 a1 q q -> make the second visual row window 1 and the fourth window 0
        s.window_id[1] = 1;
        s.window_id[3] = 0;
        CHECK(mentions(validate_stream(s, layout), "window_id decreases"));
    }
    SUBCASE("empty layout") {
        auto s = tiny_stream();
        CHECK(mentions(validate_stream(s, WindowLayout{}), "T must be >= 1"));
    }
}

// Exhaustive over single-field corruptions of small streams: the report is
// clean exactly when no invariant was broken.
TEST_CASE("validate_stream passes iff invariants hold (enumerated corruptions)") {
    std::mt19937_64 rng(11);
    for (int trial = 0; trial < 50; ++trial) {
        std::uniform_int_distribution<int> count(0, 3);
        WindowLayout layout{{count(rng), count(rng)}, {count(rng), count(rng)}};
        auto s = oracle::make_stream(rng, layout, 1 + trial % 3, 2);
        REQUIRE(s.size() <= 20);
        CHECK(validate_stream(s, layout).ok());
        for (std::size_t i = 0; i < s.size(); ++i) {
            auto bad = s;
            if (bad.modality[i] == Modality::text) {
                bad.window_id[i] = 0;
            } else {
                bad.window_id[i] = kNoWindow;
            }
            CHECK_FALSE(validate_stream(bad, layout).ok());

            auto dup = s;
            if (i > 0) {
                dup.position[i] = dup.position[i - 1];
                CHECK_FALSE(validate_stream(dup, layout).ok());
            }
        }
        auto off = layout;
        off.n_a[0] += 1;
        CHECK_FALSE(validate_stream(s, off).ok());
    }
}

TEST_CASE("overall_ratio reproduces the per-window budget identity") {
    const auto qwen = WindowLayout::uniform(1, 288, 50);
    CHECK(overall_ratio(0.30, 0.65, qwen) == doctest::Approx(0.3518).epsilon(1e-4));
    CHECK(overall_ratio(0.24, 1.00, qwen) == doctest::Approx(0.3524).epsilon(1e-4));
    for (double x : {0.0, 0.1, 0.37, 1.0}) {
        CHECK(overall_ratio(x, x, WindowLayout{{5, 0, 9}, {1, 7, 2}}) == doctest::Approx(x).epsilon(1e-15));
    }
    CHECK_THROWS_AS(overall_ratio(0.5, 0.5, WindowLayout{{0}, {0}}), Error);
}

TEST_CASE("audio_intact_ratio_v") {
    const auto qwen = WindowLayout::uniform(3, 288, 50);
    CHECK(audio_intact_ratio_v(0.35, qwen) == doctest::Approx(0.2372).epsilon(1e-3));
    CHECK(std::round(audio_intact_ratio_v(0.35, qwen) * 100) == 24);
    CHECK(audio_intact_ratio_v(1.0, qwen) == doctest::Approx(1.0));
    CHECK_THROWS_AS(audio_intact_ratio_v(0.10, qwen), InfeasibleError);
    CHECK_THROWS_AS(audio_intact_ratio_v(0.15, qwen, 0.05), InfeasibleError);
    CHECK_NOTHROW(audio_intact_ratio_v(0.15, qwen));
}

TEST_CASE("audio-intact ratio inverts overall_ratio; overall_ratio is monotone") {
    std::mt19937_64 rng(5);
    std::uniform_int_distribution<int> cnt(1, 400);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int i = 0; i < 2000; ++i) {
        WindowLayout l{{cnt(rng), cnt(rng)}, {cnt(rng), cnt(rng)}};
        const double r = u(rng);
        try {
            const double rv = audio_intact_ratio_v(r, l);
            CHECK(std::abs(overall_ratio(rv, 1.0, l) - r) <= 1e-12);
        } catch (const InfeasibleError&) {
            CHECK(r * double(l.total_visual() + l.total_audio()) < double(l.total_audio()));
        }
        const double a = u(rng);
        const double b = u(rng);
        const double bump = u(rng) * (1.0 - std::max(a, b));
        CHECK(overall_ratio(a + bump, b, l) >= overall_ratio(a, b, l));
        CHECK(overall_ratio(a, b + bump, l) >= overall_ratio(a, b, l));
    }
}

TEST_CASE("model config validation") {
    CHECK_NOTHROW(ModelConfig::qwen25_omni_7b().validate());
    auto c = ModelConfig::qwen25_omni_7b();
    c.boundaries.mid1 = c.boundaries.shallow_end;
    CHECK_THROWS_AS(c.validate(), Error);
    c = ModelConfig::qwen25_omni_7b();
    c.boundaries.late_start = 29;
    CHECK_THROWS_AS(c.validate(), Error);
    c = ModelConfig::qwen25_omni_7b();
    c.d_ff = 0;
    CHECK_THROWS_AS(c.validate(), Error);
}

TEST_CASE("stream subset keeps order and labels") {
    const auto s = tiny_stream();
    const std::vector<std::size_t> rows{0, 3, 5};
    const auto sub = s.subset(rows);
    REQUIRE(sub.size() == 3);
    CHECK(sub.position == std::vector<std::int64_t>{s.position[0], s.position[3], s.position[5]});
    CHECK(sub.embeddings.row(1)[2] == s.embeddings.row(3)[2]);
}
