// SPDX-License-Identifier: Apache-2.0

#include "seats/synth.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "seats/relevance.hpp"

namespace seats {

namespace {

// Stream tags keep the draws of different purposes independent.
constexpr std::uint64_t kTagCluster = 1;
constexpr std::uint64_t kTagAssign = 2;
constexpr std::uint64_t kTagNoise = 3;
constexpr std::uint64_t kTagText = 4;
constexpr std::uint64_t kTagQuery = 0x1000;
constexpr std::uint64_t kTagEncoder = 0x100000;

}  // namespace

std::uint64_t CounterRng::mix(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

std::uint64_t CounterRng::bits(std::uint64_t tag, std::uint64_t counter) const {
    return mix(mix(m_seed ^ (tag * 0xD1B54A32D192ED03ULL)) + counter);
}

double CounterRng::uniform(std::uint64_t tag, std::uint64_t counter) const {
    return static_cast<double>(bits(tag, counter) >> 11) * 0x1.0p-53;
}

double CounterRng::normal(std::uint64_t tag, std::uint64_t counter) const {
    const double u1 = 1.0 - uniform(tag, 2 * counter);
    const double u2 = uniform(tag, 2 * counter + 1);
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

void SynthSpec::validate() const {
    if (windows < 1 || dim < 1 || n_v < 1 || n_a < 1 || n_q < 1 || clusters < 1) {
        throw Error("synth spec: sizes must be positive");
    }
    for (auto t : planted_windows) {
        if (t >= windows) {
            throw Error("synth spec: planted window " + std::to_string(t) + " outside [0, " +
                        std::to_string(windows) + ")");
        }
    }
    if (planted_gain < 0.0) {
        throw Error("synth spec: planted_gain must be >= 0");
    }
}

SynthAttention::SynthAttention(SynthSpec spec) : m_spec(std::move(spec)), m_rng(m_spec.seed) {
    m_planted.assign(m_spec.windows, 0);
    for (auto t : m_spec.planted_windows) {
        if (t < m_planted.size()) {
            m_planted[t] = 1;
        }
    }
}

double SynthAttention::query_logit(int layer, std::int64_t position, std::int32_t window, Modality m) const {
    double logit = m_rng.normal(kTagQuery + static_cast<std::uint64_t>(layer), static_cast<std::uint64_t>(position));
    if (m != Modality::text && window >= 0 && static_cast<std::size_t>(window) < m_planted.size() &&
        m_planted[static_cast<std::size_t>(window)]) {
        logit += m_spec.planted_gain;
    }
    return logit;
}

std::vector<double> SynthAttention::query_attention(int layer, const TokenStream& stream) const {
    std::vector<double> logits(stream.size());
    for (std::size_t i = 0; i < stream.size(); ++i) {
        logits[i] = query_logit(layer, stream.position[i], stream.window_id[i], stream.modality[i]);
    }
    return tempered_softmax(logits, 1.0);
}

std::optional<Matrix> SynthAttention::encoder_attention(std::size_t window, Modality m, const TokenStream& stream,
                                                        std::span<const std::size_t> rows) const {
    const auto n = rows.size();
    Matrix attn(n, n);
    const std::uint64_t tag = kTagEncoder + 2 * static_cast<std::uint64_t>(window) + static_cast<std::uint64_t>(m);
    std::vector<double> logits(n);
    for (std::size_t i = 0; i < n; ++i) {
        const auto pi = static_cast<std::uint64_t>(stream.position[rows[i]]);
        for (std::size_t j = 0; j < n; ++j) {
            const auto pj = static_cast<std::uint64_t>(stream.position[rows[j]]);
            logits[j] = m_rng.normal(tag, (pi << 32) | pj);
        }
        const auto p = tempered_softmax(logits, 1.0);
        for (std::size_t j = 0; j < n; ++j) {
            attn(i, j) = static_cast<float>(p[j]);
        }
    }
    return attn;
}

std::string SynthAttention::describe() const {
    return std::string("synth:") + CounterRng::kAlgorithm + ":seed=" + std::to_string(m_spec.seed);
}

EmbeddingAttention::EmbeddingAttention(std::optional<std::vector<float>> query) : m_query(std::move(query)) {}

std::vector<double> EmbeddingAttention::query_attention(int /*layer*/, const TokenStream& stream) const {
    std::vector<float> query;
    if (m_query) {
        query = *m_query;
    } else {
        std::size_t last = stream.size();
        for (std::size_t i = stream.size(); i-- > 0;) {
            if (stream.modality[i] == Modality::text) {
                last = i;
                break;
            }
        }
        if (last == stream.size()) {
            throw Error("embedding attention: stream has no text token to act as query");
        }
        auto row = stream.embeddings.row(last);
        query.assign(row.begin(), row.end());
    }
    return query_scores(query, stream.embeddings, 1.0 / std::sqrt(static_cast<double>(stream.dim())));
}

std::optional<Matrix> EmbeddingAttention::encoder_attention(std::size_t, Modality, const TokenStream&,
                                                            std::span<const std::size_t>) const {
    return std::nullopt;
}

std::string EmbeddingAttention::describe() const {
    return m_query ? "embedding:query-vector" : "embedding:last-text-token";
}

SynthOutput synth_generate(const SynthSpec& spec) {
    spec.validate();
    const CounterRng rng(spec.seed);
    const auto d = spec.dim;
    const auto per_window = static_cast<std::size_t>(spec.n_v + spec.n_a);
    const auto n = spec.windows * per_window + static_cast<std::size_t>(spec.n_q);

    TokenStream s;
    s.embeddings = Matrix(n, d);
    s.modality.reserve(n);
    s.window_id.reserve(n);
    s.position.reserve(n);

    std::size_t row = 0;
    for (std::size_t t = 0; t < spec.windows; ++t) {
        for (Modality m : {Modality::visual, Modality::audio}) {
            const auto count = static_cast<std::size_t>(m == Modality::visual ? spec.n_v : spec.n_a);
            const std::uint64_t group = 2 * t + static_cast<std::uint64_t>(m);
            for (std::size_t k = 0; k < count; ++k, ++row) {
                const auto cluster = rng.bits(kTagAssign, (group << 32) | k) % spec.clusters;
                auto out = s.embeddings.row(row);
                for (std::size_t c = 0; c < d; ++c) {
                    const double centre = rng.normal(kTagCluster, ((group * spec.clusters + cluster) << 20) | c);
                    const double jitter = rng.normal(kTagNoise, static_cast<std::uint64_t>(row) * d + c);
                    out[c] = static_cast<float>(centre + spec.noise * jitter);
                }
                s.modality.push_back(m);
                s.window_id.push_back(static_cast<std::int32_t>(t));
                s.position.push_back(static_cast<std::int64_t>(row));
            }
        }
    }
    for (std::int64_t q = 0; q < spec.n_q; ++q, ++row) {
        auto out = s.embeddings.row(row);
        for (std::size_t c = 0; c < d; ++c) {
            out[c] = static_cast<float>(rng.normal(kTagText, static_cast<std::uint64_t>(row) * d + c));
        }
        s.modality.push_back(Modality::text);
        s.window_id.push_back(kNoWindow);
        s.position.push_back(static_cast<std::int64_t>(row));
    }

    WindowLayout layout = WindowLayout::uniform(spec.windows, spec.n_v, spec.n_a);
    return SynthOutput{std::move(s), std::move(layout), SynthAttention(spec)};
}

GroupSaliency encoder_saliency(const AttentionSource& source, const TokenStream& stream, std::size_t windows) {
    GroupSaliency out;
    for (std::size_t t = 0; t < windows; ++t) {
        for (Modality m : {Modality::visual, Modality::audio}) {
            const auto rows = stream.group(t, m);
            if (rows.empty()) {
                continue;
            }
            if (auto attn = source.encoder_attention(t, m, stream, rows)) {
                out[{static_cast<std::int32_t>(t), m}] = mean_received_attention(*attn);
            }
        }
    }
    return out;
}

}  // namespace seats
