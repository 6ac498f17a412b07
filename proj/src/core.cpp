// SPDX-License-Identifier: Apache-2.0

#include "seats/core.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

namespace seats {

const char* to_string(Modality m) {
    switch (m) {
    case Modality::visual:
        return "visual";
    case Modality::audio:
        return "audio";
    case Modality::text:
        return "text";
    }
    return "unknown";
}

Matrix::Matrix(std::size_t rows, std::size_t cols, std::vector<float> data)
    : m_rows(rows), m_cols(cols), m_data(std::move(data)) {
    if (m_data.size() != rows * cols) {
        throw Error("matrix data size " + std::to_string(m_data.size()) + " does not match " +
                    std::to_string(rows) + "x" + std::to_string(cols));
    }
}

Matrix Matrix::gather(std::span<const std::size_t> rows) const {
    Matrix out(rows.size(), m_cols);
    for (std::size_t i = 0; i < rows.size(); ++i) {
        auto src = row(rows[i]);
        std::copy(src.begin(), src.end(), out.row(i).begin());
    }
    return out;
}

std::int64_t WindowLayout::total_visual() const {
    return std::accumulate(n_v.begin(), n_v.end(), std::int64_t{0});
}

std::int64_t WindowLayout::total_audio() const {
    return std::accumulate(n_a.begin(), n_a.end(), std::int64_t{0});
}

std::int64_t WindowLayout::count(std::size_t window, Modality m) const {
    switch (m) {
    case Modality::visual:
        return n_v.at(window);
    case Modality::audio:
        return n_a.at(window);
    case Modality::text:
        break;
    }
    return 0;
}

WindowLayout WindowLayout::uniform(std::size_t windows, std::int64_t n_v, std::int64_t n_a) {
    return WindowLayout{std::vector<std::int64_t>(windows, n_v), std::vector<std::int64_t>(windows, n_a)};
}

std::size_t TokenStream::count(Modality m) const {
    return static_cast<std::size_t>(std::count(modality.begin(), modality.end(), m));
}

std::vector<std::size_t> TokenStream::group(std::size_t window, Modality m) const {
    std::vector<std::size_t> rows;
    for (std::size_t i = 0; i < size(); ++i) {
        if (modality[i] == m && window_id[i] == static_cast<std::int32_t>(window)) {
            rows.push_back(i);
        }
    }
    return rows;
}

TokenStream TokenStream::subset(std::span<const std::size_t> rows) const {
    TokenStream out;
    out.embeddings = embeddings.gather(rows);
    out.modality.reserve(rows.size());
    out.window_id.reserve(rows.size());
    out.position.reserve(rows.size());
    for (std::size_t r : rows) {
        out.modality.push_back(modality[r]);
        out.window_id.push_back(window_id[r]);
        out.position.push_back(position[r]);
    }
    return out;
}

WindowLayout TokenStream::layout(std::size_t windows) const {
    WindowLayout l{std::vector<std::int64_t>(windows, 0), std::vector<std::int64_t>(windows, 0)};
    for (std::size_t i = 0; i < size(); ++i) {
        if (modality[i] == Modality::text || window_id[i] < 0 ||
            static_cast<std::size_t>(window_id[i]) >= windows) {
            continue;
        }
        auto& counts = modality[i] == Modality::visual ? l.n_v : l.n_a;
        ++counts[static_cast<std::size_t>(window_id[i])];
    }
    return l;
}

ValidationReport validate_stream(const TokenStream& stream, const WindowLayout& layout) {
    ValidationReport report;
    auto fail = [&report](const std::string& msg) { report.violations.push_back(msg); };

    const std::size_t n = stream.size();
    if (stream.window_id.size() != n || stream.position.size() != n || stream.embeddings.rows() != n) {
        std::ostringstream os;
        os << "row count mismatch: modality=" << n << " window_id=" << stream.window_id.size()
           << " position=" << stream.position.size() << " embeddings=" << stream.embeddings.rows();
        fail(os.str());
        return report;
    }
    if (layout.n_v.size() != layout.n_a.size()) {
        fail("layout n_v and n_a have different window counts");
        return report;
    }
    const auto windows = static_cast<std::int64_t>(layout.windows());
    if (windows < 1) {
        fail("layout has no windows (T must be >= 1)");
    }
    for (std::size_t t = 0; t < layout.windows(); ++t) {
        if (layout.n_v[t] < 0 || layout.n_a[t] < 0) {
            fail("layout window " + std::to_string(t) + " has a negative count");
        }
    }

    std::int32_t last_window[2] = {kNoWindow, kNoWindow};
    for (std::size_t i = 0; i < n; ++i) {
        if (i > 0 && stream.position[i] <= stream.position[i - 1]) {
            fail("row " + std::to_string(i) + ": position " + std::to_string(stream.position[i]) +
                 " is not greater than previous position " + std::to_string(stream.position[i - 1]));
        }
        const Modality m = stream.modality[i];
        const std::int32_t w = stream.window_id[i];
        if (m == Modality::text) {
            if (w != kNoWindow) {
                fail("row " + std::to_string(i) + ": text row carries window_id " + std::to_string(w));
            }
            continue;
        }
        if (m != Modality::visual && m != Modality::audio) {
            fail("row " + std::to_string(i) + ": unknown modality code");
            continue;
        }
        if (w == kNoWindow) {
            fail("row " + std::to_string(i) + ": " + to_string(m) + " row has no window_id");
            continue;
        }
        if (w < 0 || w >= windows) {
            fail("row " + std::to_string(i) + ": window_id " + std::to_string(w) + " outside [0, " +
                 std::to_string(windows) + ")");
        }
        auto& last = last_window[static_cast<int>(m)];
        if (last != kNoWindow && w < last) {
            fail("row " + std::to_string(i) + ": " + to_string(m) + " window_id decreases from " +
                 std::to_string(last) + " to " + std::to_string(w));
        }
        last = w;
    }

    const auto actual = stream.layout(layout.windows());
    const auto n_v = static_cast<std::int64_t>(stream.count(Modality::visual));
    const auto n_a = static_cast<std::int64_t>(stream.count(Modality::audio));
    if (layout.total_visual() != n_v) {
        fail("layout visual sum " + std::to_string(layout.total_visual()) + " != stream N_v " + std::to_string(n_v));
    }
    if (layout.total_audio() != n_a) {
        fail("layout audio sum " + std::to_string(layout.total_audio()) + " != stream N_a " + std::to_string(n_a));
    }
    for (std::size_t t = 0; t < layout.windows(); ++t) {
        if (actual.n_v[t] != layout.n_v[t] || actual.n_a[t] != layout.n_a[t]) {
            std::ostringstream os;
            os << "window " << t << ": layout counts (" << layout.n_v[t] << ", " << layout.n_a[t]
               << ") != stream counts (" << actual.n_v[t] << ", " << actual.n_a[t] << ")";
            fail(os.str());
        }
    }
    return report;
}

void ModelConfig::validate() const {
    const auto& b = boundaries;
    if (layers < 1 || d_model < 1 || d_ff < 1 || n_heads < 1) {
        throw Error("model config: layers and widths must be positive");
    }
    if (!(1 <= b.shallow_end && b.shallow_end < b.mid1 && b.mid1 <= b.mid2 && b.mid2 < b.late_start &&
          b.late_start <= layers)) {
        std::ostringstream os;
        os << "model config: boundaries (" << b.shallow_end << ", " << b.mid1 << ", " << b.mid2 << ", "
           << b.late_start << ") violate 1 <= L_s < L_m1 <= L_m2 < L_l <= L (L=" << layers << ")";
        throw Error(os.str());
    }
}

ModelConfig ModelConfig::qwen25_omni_7b() {
    return ModelConfig{28, 3584, 18944, 28, LayerBoundaries{16, 19, 21, 24}};
}

void RetentionSpec::validate() const {
    auto in_unit = [](double r) { return r >= 0.0 && r <= 1.0; };
    if (!in_unit(ratio) || !in_unit(ratio_v) || !in_unit(ratio_a)) {
        throw Error("retention spec: R, R_v, R_a must lie in [0, 1]");
    }
    if (!(lambda >= 1.0)) {
        throw Error("retention spec: lambda must be >= 1");
    }
    if (!(tau > 0.0)) {
        throw Error("retention spec: tau must be > 0");
    }
}

double overall_ratio(double ratio_v, double ratio_a, const WindowLayout& layout) {
    const auto n_v = static_cast<double>(layout.total_visual());
    const auto n_a = static_cast<double>(layout.total_audio());
    if (n_v + n_a <= 0.0) {
        throw Error("overall_ratio: layout has no visual or audio tokens");
    }
    return (ratio_v * n_v + ratio_a * n_a) / (n_v + n_a);
}

double audio_intact_ratio_v(double ratio, const WindowLayout& layout, double min_practical) {
    const auto n_v = static_cast<double>(layout.total_visual());
    const auto n_a = static_cast<double>(layout.total_audio());
    if (n_v <= 0.0) {
        throw Error("audio_intact_ratio_v: layout has no visual tokens");
    }
    const double ratio_v = (ratio * (n_v + n_a) - n_a) / n_v;
    if (ratio_v < min_practical) {
        std::ostringstream os;
        os << "audio-intact visual ratio " << ratio_v << " for R=" << ratio << " is below " << min_practical;
        throw InfeasibleError(os.str());
    }
    return ratio_v;
}

}  // namespace seats
