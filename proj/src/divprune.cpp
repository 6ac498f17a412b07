// SPDX-License-Identifier: Apache-2.0

#include "seats/divprune.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <cmath>
#include <limits>
#include <thread>

namespace seats {

namespace {

double norm(std::span<const float> v) {
    double s = 0.0;
    for (float x : v) {
        s += static_cast<double>(x) * static_cast<double>(x);
    }
    return std::sqrt(s);
}

}  // namespace

double cosine_distance(std::span<const float> a, std::span<const float> b) {
    const double na = norm(a);
    const double nb = norm(b);
    if (na == 0.0 || nb == 0.0) {
        return 1.0;
    }
    double dot = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        dot += static_cast<double>(a[i]) * static_cast<double>(b[i]);
    }
    return 1.0 - dot / (na * nb);
}

GreedyResult greedy_maxmin(const Matrix& embeddings, std::span<const double> weights, std::size_t k) {
    const std::size_t n = embeddings.rows();
    if (weights.size() != n) {
        throw Error("greedy_maxmin: " + std::to_string(weights.size()) + " weights for " + std::to_string(n) +
                    " tokens");
    }
    if (k > n) {
        throw Error("greedy_maxmin: k = " + std::to_string(k) + " exceeds group size " + std::to_string(n));
    }
    GreedyResult result;
    std::vector<double> norms(n);
    for (std::size_t i = 0; i < n; ++i) {
        norms[i] = norm(embeddings.row(i));
        if (norms[i] == 0.0) {
            result.zero_norm_rows.push_back(i);
        }
    }
    if (k == 0) {
        return result;
    }
    if (k == n) {
        result.picks.resize(n);
        for (std::size_t i = 0; i < n; ++i) {
            result.picks[i] = i;
        }
        return result;
    }

    // Symmetric unweighted distances; the weight is applied per candidate.
    std::vector<double> dist(n * n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        auto zi = embeddings.row(i);
        for (std::size_t j = i + 1; j < n; ++j) {
            double d = 1.0;
            if (norms[i] != 0.0 && norms[j] != 0.0) {
                auto zj = embeddings.row(j);
                double dot = 0.0;
                for (std::size_t c = 0; c < zi.size(); ++c) {
                    dot += static_cast<double>(zi[c]) * static_cast<double>(zj[c]);
                }
                d = 1.0 - dot / (norms[i] * norms[j]);
            }
            dist[i * n + j] = d;
            dist[j * n + i] = d;
        }
    }

    // Seed: largest weighted distance to the nearest neighbour.
    std::size_t seed = 0;
    double best = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < n; ++i) {
        double nearest = std::numeric_limits<double>::infinity();
        for (std::size_t j = 0; j < n; ++j) {
            if (j != i) {
                nearest = std::min(nearest, dist[i * n + j]);
            }
        }
        const double score = nearest * weights[i];
        if (score > best) {
            best = score;
            seed = i;
        }
    }

    std::vector<char> taken(n, 0);
    std::vector<double> min_dist(n, std::numeric_limits<double>::infinity());
    result.picks.reserve(k);
    std::size_t pick = seed;
    for (;;) {
        result.picks.push_back(pick);
        taken[pick] = 1;
        if (result.picks.size() == k) {
            break;
        }
        for (std::size_t j = 0; j < n; ++j) {
            min_dist[j] = std::min(min_dist[j], dist[pick * n + j]);
        }
        best = -std::numeric_limits<double>::infinity();
        for (std::size_t j = 0; j < n; ++j) {
            if (taken[j]) {
                continue;
            }
            const double score = min_dist[j] * weights[j];
            if (score > best) {
                best = score;
                pick = j;
            }
        }
    }
    return result;
}

std::int64_t group_keep_count(double r, std::int64_t n) {
    if (n <= 0 || r <= 0.0) {
        return 0;
    }
    const auto k = static_cast<std::int64_t>(std::floor(r * static_cast<double>(n) + 1e-9));
    return std::clamp<std::int64_t>(k, 1, n);
}

std::int64_t SelectionResult::kept_of(Modality m) const {
    std::int64_t sum = 0;
    for (const auto& w : per_window_kept) {
        sum += w[static_cast<std::size_t>(m)];
    }
    return sum;
}

SelectionResult win_div_prune(const TokenStream& stream, const WindowLayout& layout, const GroupSaliency& saliency,
                              const RetentionSpec& spec, unsigned threads) {
    const auto report = validate_stream(stream, layout);
    if (!report.ok()) {
        throw Error("win_div_prune: invalid stream: " + report.violations.front());
    }
    const double r_v = std::min(1.0, spec.lambda * spec.ratio_v);
    const double r_a = std::min(1.0, spec.lambda * spec.ratio_a);
    const auto windows = layout.windows();

    struct Group {
        std::int32_t window;
        Modality modality;
        std::vector<std::size_t> rows;
        std::int64_t keep;
        std::vector<std::size_t> kept;
        std::vector<std::size_t> zero_norm;
    };
    std::vector<Group> groups;
    groups.reserve(windows * 2);
    for (std::size_t t = 0; t < windows; ++t) {
        for (Modality m : {Modality::visual, Modality::audio}) {
            Group g{static_cast<std::int32_t>(t), m, stream.group(t, m), 0, {}, {}};
            g.keep = group_keep_count(m == Modality::visual ? r_v : r_a, static_cast<std::int64_t>(g.rows.size()));
            groups.push_back(std::move(g));
        }
    }

    auto run_group = [&](Group& g) {
        const auto n = g.rows.size();
        SaliencyVector weights;
        if (auto it = saliency.find({g.window, g.modality}); it != saliency.end()) {
            weights = it->second;
            if (weights.size() != n) {
                throw Error("win_div_prune: saliency for window " + std::to_string(g.window) + " " +
                            to_string(g.modality) + " has " + std::to_string(weights.size()) + " entries, group has " +
                            std::to_string(n));
            }
        } else {
            weights.assign(n, 1.0);
        }
        const auto sel = greedy_maxmin(stream.embeddings.gather(g.rows), weights, static_cast<std::size_t>(g.keep));
        for (auto local : sel.picks) {
            g.kept.push_back(g.rows[local]);
        }
        for (auto local : sel.zero_norm_rows) {
            g.zero_norm.push_back(g.rows[local]);
        }
    };

    const unsigned workers = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(groups.size())));
    if (workers == 1) {
        for (auto& g : groups) {
            run_group(g);
        }
    } else {
        std::atomic<std::size_t> next{0};
        std::vector<std::exception_ptr> errors(workers);
        {
            std::vector<std::jthread> pool;
            for (unsigned w = 0; w < workers; ++w) {
                pool.emplace_back([&, w] {
                    try {
                        for (std::size_t i = next++; i < groups.size(); i = next++) {
                            run_group(groups[i]);
                        }
                    } catch (...) {
                        errors[w] = std::current_exception();
                    }
                });
            }
        }
        for (auto& e : errors) {
            if (e) {
                std::rethrow_exception(e);
            }
        }
    }

    SelectionResult out;
    out.per_window_kept.assign(windows, {0, 0});
    for (std::size_t i = 0; i < stream.size(); ++i) {
        if (stream.modality[i] == Modality::text) {
            out.kept.push_back(i);
        }
    }
    for (const auto& g : groups) {
        out.kept.insert(out.kept.end(), g.kept.begin(), g.kept.end());
        out.zero_norm_rows.insert(out.zero_norm_rows.end(), g.zero_norm.begin(), g.zero_norm.end());
        out.per_window_kept[static_cast<std::size_t>(g.window)][static_cast<std::size_t>(g.modality)] =
            static_cast<std::int64_t>(g.kept.size());
    }
    std::sort(out.kept.begin(), out.kept.end());
    std::sort(out.zero_norm_rows.begin(), out.zero_norm_rows.end());
    return out;
}

}  // namespace seats
