// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace seats {

enum class Modality : std::uint8_t { visual = 0, audio = 1, text = 2 };

const char* to_string(Modality m);

inline constexpr std::int32_t kNoWindow = -1;

/// Base class for every domain failure the engine reports (infeasible
/// schedule, malformed container, contract violation on inputs).
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class InfeasibleError : public Error {
public:
    using Error::Error;
};

/// Row-major float matrix. Rows are tokens, columns are feature dimensions.
class Matrix {
public:
    Matrix() = default;
    Matrix(std::size_t rows, std::size_t cols) : m_rows(rows), m_cols(cols), m_data(rows * cols, 0.0f) {}
    Matrix(std::size_t rows, std::size_t cols, std::vector<float> data);

    std::size_t rows() const { return m_rows; }
    std::size_t cols() const { return m_cols; }

    std::span<const float> row(std::size_t i) const { return {m_data.data() + i * m_cols, m_cols}; }
    std::span<float> row(std::size_t i) { return {m_data.data() + i * m_cols, m_cols}; }

    float operator()(std::size_t i, std::size_t j) const { return m_data[i * m_cols + j]; }
    float& operator()(std::size_t i, std::size_t j) { return m_data[i * m_cols + j]; }

    const std::vector<float>& data() const { return m_data; }

    /// Copies the listed rows, in the order given.
    Matrix gather(std::span<const std::size_t> rows) const;

    bool operator==(const Matrix&) const = default;

private:
    std::size_t m_rows = 0;
    std::size_t m_cols = 0;
    std::vector<float> m_data;
};

/// Per-window token counts of the visual and audio modalities.
struct WindowLayout {
    std::vector<std::int64_t> n_v;
    std::vector<std::int64_t> n_a;

    std::size_t windows() const { return n_v.size(); }
    std::int64_t total_visual() const;
    std::int64_t total_audio() const;
    std::int64_t count(std::size_t window, Modality m) const;

    static WindowLayout uniform(std::size_t windows, std::int64_t n_v, std::int64_t n_a);

    bool operator==(const WindowLayout&) const = default;
};

/// Embedded omni-modal token sequence. Rows are kept in original sequence
/// order; selections shrink the stream but never reorder it.
struct TokenStream {
    Matrix embeddings;
    std::vector<Modality> modality;
    std::vector<std::int32_t> window_id;  // kNoWindow for text rows
    std::vector<std::int64_t> position;

    std::size_t size() const { return modality.size(); }
    std::size_t dim() const { return embeddings.cols(); }
    std::size_t count(Modality m) const;

    /// Row indices (into this stream) of window `t`'s tokens of modality `m`.
    std::vector<std::size_t> group(std::size_t window, Modality m) const;

    /// Keeps the listed rows; `rows` must be ascending.
    TokenStream subset(std::span<const std::size_t> rows) const;

    /// Layout with `windows` entries counted from this stream's labels.
    WindowLayout layout(std::size_t windows) const;

    bool operator==(const TokenStream&) const = default;
};

struct ValidationReport {
    std::vector<std::string> violations;

    bool ok() const { return violations.empty(); }
};

ValidationReport validate_stream(const TokenStream& stream, const WindowLayout& layout);

/// Layer boundaries, 1-based: shallow block [1, shallow_end], middle
/// sub-blocks (shallow_end, mid1), [mid1, mid2), [mid2, late_start), late
/// block [late_start, L].
struct LayerBoundaries {
    int shallow_end = 0;
    int mid1 = 0;
    int mid2 = 0;
    int late_start = 0;

    bool operator==(const LayerBoundaries&) const = default;
};

struct ModelConfig {
    int layers = 0;
    std::int64_t d_model = 0;
    std::int64_t d_ff = 0;
    int n_heads = 0;
    LayerBoundaries boundaries;

    /// Throws Error when the boundary ordering or widths are invalid.
    void validate() const;

    /// Qwen2.5-Omni-7B thinker dimensions with the published boundaries.
    static ModelConfig qwen25_omni_7b();

    bool operator==(const ModelConfig&) const = default;
};

struct RetentionSpec {
    double ratio = 1.0;    // overall R
    double ratio_v = 1.0;  // R_v
    double ratio_a = 1.0;  // R_a
    double lambda = 1.4;
    double tau = 0.1;

    void validate() const;

    bool operator==(const RetentionSpec&) const = default;
};

/// Overall ratio implied by per-modality ratios on a layout:
/// (R_v * N_v + R_a * N_a) / (N_v + N_a).
double overall_ratio(double ratio_v, double ratio_a, const WindowLayout& layout);

/// Visual ratio that meets `ratio` overall with audio fully retained.
/// Throws InfeasibleError when the result falls below `min_practical`
/// (0 by default, i.e. only negative ratios are rejected).
double audio_intact_ratio_v(double ratio, const WindowLayout& layout, double min_practical = 0.0);

}  // namespace seats
