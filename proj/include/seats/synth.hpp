// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "seats/core.hpp"
#include "seats/divprune.hpp"

namespace seats {

/// Counter-based generator: every draw is a pure function of
/// (seed, stream tag, counter), so any implementation of the same mixing
/// function reproduces the same values.
class CounterRng {
public:
    static constexpr const char* kAlgorithm = "splitmix64-counter";

    explicit CounterRng(std::uint64_t seed) : m_seed(seed) {}

    static std::uint64_t mix(std::uint64_t x);

    std::uint64_t bits(std::uint64_t tag, std::uint64_t counter) const;
    /// Uniform in [0, 1) with 53 bits.
    double uniform(std::uint64_t tag, std::uint64_t counter) const;
    /// Standard normal via Box-Muller over counters 2c and 2c + 1.
    double normal(std::uint64_t tag, std::uint64_t counter) const;

    std::uint64_t seed() const { return m_seed; }

private:
    std::uint64_t m_seed;
};

/// Supplies the attention signals the selection stages consume.
class AttentionSource {
public:
    virtual ~AttentionSource() = default;

    /// Attention probabilities of the last text token over every row of
    /// `stream` at 1-based `layer`; sums to 1.
    virtual std::vector<double> query_attention(int layer, const TokenStream& stream) const = 0;

    /// Final-encoder-block self-attention for one (window, modality) group,
    /// rows/cols ordered as `rows`. nullopt when unavailable.
    virtual std::optional<Matrix> encoder_attention(std::size_t window, Modality m, const TokenStream& stream,
                                                    std::span<const std::size_t> rows) const = 0;

    /// Short provenance string recorded alongside scores.
    virtual std::string describe() const = 0;
};

struct SynthSpec {
    std::uint64_t seed = 0;
    std::size_t windows = 4;
    std::size_t dim = 64;
    std::int64_t n_v = 288;
    std::int64_t n_a = 50;
    std::int64_t n_q = 64;
    std::vector<std::size_t> planted_windows;
    double planted_gain = 0.0;
    // Cluster centres per (window, modality) group; tokens scatter around them.
    std::size_t clusters = 8;
    double noise = 0.35;

    void validate() const;
};

/// Seeded attention oracle. Query logits are N(0, 1) per (layer, position)
/// plus `planted_gain` for visual/audio tokens of planted windows; encoder
/// attention rows are softmaxes of N(0, 1) logits per position pair.
class SynthAttention final : public AttentionSource {
public:
    explicit SynthAttention(SynthSpec spec);

    std::vector<double> query_attention(int layer, const TokenStream& stream) const override;
    std::optional<Matrix> encoder_attention(std::size_t window, Modality m, const TokenStream& stream,
                                            std::span<const std::size_t> rows) const override;
    std::string describe() const override;

    /// Raw query logit for original `position` at `layer`.
    double query_logit(int layer, std::int64_t position, std::int32_t window, Modality m) const;

    const SynthSpec& spec() const { return m_spec; }

private:
    SynthSpec m_spec;
    CounterRng m_rng;
    std::vector<char> m_planted;
};

/// Attention derived from the stream's own embeddings: the query vector
/// (or the last text row when none is given) against every row, scaled by
/// 1/sqrt(d). No encoder attention.
class EmbeddingAttention final : public AttentionSource {
public:
    explicit EmbeddingAttention(std::optional<std::vector<float>> query = std::nullopt);

    std::vector<double> query_attention(int layer, const TokenStream& stream) const override;
    std::optional<Matrix> encoder_attention(std::size_t window, Modality m, const TokenStream& stream,
                                            std::span<const std::size_t> rows) const override;
    std::string describe() const override;

private:
    std::optional<std::vector<float>> m_query;
};

struct SynthOutput {
    TokenStream stream;
    WindowLayout layout;
    SynthAttention attention;
};

/// Windows in chronological order, each holding its visual then its audio
/// tokens; the N_q text tokens follow the last window.
SynthOutput synth_generate(const SynthSpec& spec);

/// Stage I saliency for every group from the source's encoder attention
/// (mean received attention); groups without attention are omitted.
GroupSaliency encoder_saliency(const AttentionSource& source, const TokenStream& stream, std::size_t windows);

}  // namespace seats
