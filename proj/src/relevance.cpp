// SPDX-License-Identifier: Apache-2.0

#include "seats/relevance.hpp"

#include <algorithm>
#include <cmath>

namespace seats {

Matrix average_heads(std::span<const Matrix> heads) {
    if (heads.empty()) {
        throw Error("average_heads: no heads");
    }
    const auto rows = heads.front().rows();
    const auto cols = heads.front().cols();
    std::vector<double> acc(rows * cols, 0.0);
    for (const auto& h : heads) {
        if (h.rows() != rows || h.cols() != cols) {
            throw Error("average_heads: head shapes differ");
        }
        for (std::size_t k = 0; k < acc.size(); ++k) {
            acc[k] += h.data()[k];
        }
    }
    std::vector<float> out(acc.size());
    const auto inv = 1.0 / static_cast<double>(heads.size());
    std::transform(acc.begin(), acc.end(), out.begin(), [inv](double v) { return static_cast<float>(v * inv); });
    return Matrix(rows, cols, std::move(out));
}

SaliencyVector mean_received_attention(const Matrix& attn) {
    if (attn.rows() != attn.cols()) {
        throw Error("mean_received_attention: attention must be square, got " + std::to_string(attn.rows()) + "x" +
                    std::to_string(attn.cols()));
    }
    const auto n = attn.rows();
    SaliencyVector values(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        auto row = attn.row(i);
        for (std::size_t j = 0; j < n; ++j) {
            values[j] += row[j];
        }
    }
    if (n > 0) {
        for (auto& v : values) {
            v /= static_cast<double>(n);
        }
    }
    return values;
}

std::vector<double> tempered_softmax(std::span<const double> logits, double tau) {
    if (!(tau > 0.0)) {
        throw Error("softmax temperature must be > 0");
    }
    std::vector<double> out(logits.size());
    if (logits.empty()) {
        return out;
    }
    const double peak = *std::max_element(logits.begin(), logits.end());
    double sum = 0.0;
    for (std::size_t i = 0; i < logits.size(); ++i) {
        out[i] = std::exp((logits[i] - peak) / tau);
        sum += out[i];
    }
    for (auto& v : out) {
        v /= sum;
    }
    return out;
}

std::vector<double> query_scores(std::span<const float> query, const Matrix& keys, double scale) {
    if (keys.rows() == 0) {
        throw Error("query_scores: no keys");
    }
    if (keys.cols() != query.size()) {
        throw Error("query_scores: query dim " + std::to_string(query.size()) + " != key dim " +
                    std::to_string(keys.cols()));
    }
    std::vector<double> logits(keys.rows());
    for (std::size_t i = 0; i < keys.rows(); ++i) {
        auto k = keys.row(i);
        double dot = 0.0;
        for (std::size_t c = 0; c < query.size(); ++c) {
            dot += static_cast<double>(query[c]) * static_cast<double>(k[c]);
        }
        logits[i] = dot * scale;
    }
    return tempered_softmax(logits, 1.0);
}

namespace {

// Softmax over the windows that hold the modality; absent windows get 0.
std::vector<double> modality_weights(std::span<const double> scores, const std::vector<std::int64_t>& counts,
                                     double tau) {
    std::vector<double> means;
    std::vector<std::size_t> present;
    std::size_t offset = 0;
    for (std::size_t t = 0; t < counts.size(); ++t) {
        const auto n = static_cast<std::size_t>(counts[t]);
        if (n > 0) {
            double sum = 0.0;
            for (std::size_t i = 0; i < n; ++i) {
                sum += scores[offset + i];
            }
            means.push_back(sum / static_cast<double>(n));
            present.push_back(t);
        }
        offset += n;
    }
    std::vector<double> weights(counts.size(), 0.0);
    const auto soft = tempered_softmax(means, tau);
    for (std::size_t k = 0; k < present.size(); ++k) {
        weights[present[k]] = soft[k];
    }
    return weights;
}

}  // namespace

std::vector<double> combine_window_weights(std::span<const double> s_v, std::span<const double> s_a,
                                           const WindowLayout& layout) {
    const auto windows = layout.windows();
    if (s_v.size() != windows || s_a.size() != windows) {
        throw Error("combine_window_weights: weight vectors do not match the layout's windows");
    }
    std::vector<double> s(windows, 0.0);
    const bool any_v = layout.total_visual() > 0;
    const bool any_a = layout.total_audio() > 0;
    bool mixed = false;
    for (std::size_t t = 0; t < windows; ++t) {
        const bool has_v = layout.n_v[t] > 0;
        const bool has_a = layout.n_a[t] > 0;
        if (has_v && has_a) {
            s[t] = 0.5 * (s_v[t] + s_a[t]);
        } else if (has_v) {
            s[t] = s_v[t];
            mixed = mixed || any_a;
        } else if (has_a) {
            s[t] = s_a[t];
            mixed = mixed || any_v;
        }
    }
    if (mixed) {
        double sum = 0.0;
        for (double v : s) {
            sum += v;
        }
        if (sum > 0.0) {
            for (auto& v : s) {
                v /= sum;
            }
        }
    }
    return s;
}

RelevanceScores window_relevance(std::span<const double> scores_v, std::span<const double> scores_a,
                                 const WindowLayout& layout, double tau) {
    if (!(tau > 0.0)) {
        throw Error("window_relevance: tau must be > 0");
    }
    if (static_cast<std::int64_t>(scores_v.size()) != layout.total_visual() ||
        static_cast<std::int64_t>(scores_a.size()) != layout.total_audio()) {
        throw Error("window_relevance: score lengths (" + std::to_string(scores_v.size()) + ", " +
                    std::to_string(scores_a.size()) + ") do not match layout totals (" +
                    std::to_string(layout.total_visual()) + ", " + std::to_string(layout.total_audio()) + ")");
    }
    RelevanceScores rel;
    rel.tau = tau;
    rel.s_v = modality_weights(scores_v, layout.n_v, tau);
    rel.s_a = modality_weights(scores_a, layout.n_a, tau);
    rel.s = combine_window_weights(rel.s_v, rel.s_a, layout);
    return rel;
}

}  // namespace seats
