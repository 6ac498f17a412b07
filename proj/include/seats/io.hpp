// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "seats/allocator.hpp"
#include "seats/core.hpp"
#include "seats/cost.hpp"
#include "seats/divprune.hpp"
#include "seats/pipeline.hpp"
#include "seats/schedule.hpp"
#include "seats/synth.hpp"

namespace seats {

// ---------------------------------------------------------------------------
// OTS container
//
//   bytes 0..3   "OTS" + version digit ('1')
//   bytes 4..11  header length H, u64 little-endian
//   H bytes      UTF-8 JSON header, keys sorted, no whitespace
//   N*d*4 bytes  embeddings, row-major f32 little-endian
//   sections     per header "sections" entry: u64 LE byte length, then
//                rows*cols f32 little-endian values
// ---------------------------------------------------------------------------

inline constexpr int kOtsVersion = 1;

class OtsError : public Error {
public:
    enum class Kind { bad_magic, unsupported_version, truncated, size_mismatch, count_mismatch, bad_header, io };

    OtsError(Kind kind, std::uint64_t offset, const std::string& what);

    Kind kind() const { return m_kind; }
    std::uint64_t offset() const { return m_offset; }
    const std::string& detail() const { return m_detail; }

private:
    Kind m_kind;
    std::uint64_t m_offset;
    std::string m_detail;
};

struct OtsContainer {
    TokenStream stream;
    std::size_t windows = 1;
    std::map<GroupKey, std::vector<float>> saliency;
    std::map<GroupKey, Matrix> attention;
    std::optional<std::vector<float>> query;
    std::map<std::string, std::string> generator;  // provenance, free-form

    bool operator==(const OtsContainer&) const = default;
};

std::vector<std::uint8_t> encode_ots(const OtsContainer& c);
OtsContainer decode_ots(const std::vector<std::uint8_t>& bytes);

void write_ots(const std::filesystem::path& path, const OtsContainer& c);
OtsContainer read_ots(const std::filesystem::path& path);

/// Saliency sections widened to the engine's double-precision vectors.
GroupSaliency saliency_of(const OtsContainer& c);

// ---------------------------------------------------------------------------
// JSON configuration documents; unknown keys are rejected.
// ---------------------------------------------------------------------------

ModelConfig parse_model_config(const std::string& json_text);
RetentionSpec parse_retention_spec(const std::string& json_text);
SynthSpec parse_synth_spec(const std::string& json_text);

std::string to_json(const ModelConfig& c);
std::string to_json(const RetentionSpec& s);
std::string to_json(const SynthSpec& s);

std::string read_text_file(const std::filesystem::path& path);

// ---------------------------------------------------------------------------
// Reports
// ---------------------------------------------------------------------------

void write_schedule_csv(std::ostream& os, const SchedulePlan& v, const SchedulePlan& a);
std::string schedule_json(const SchedulePlan& v, const SchedulePlan& a);

void write_budget_csv(std::ostream& os, const BudgetPlan& plan);
std::string budget_json(const BudgetPlan& plan);

void write_trace_csv(std::ostream& os, const PrefillTrace& trace);
std::string trace_json(const PrefillTrace& trace);
/// Parses the header comments and per-layer rows written by write_trace_csv.
/// Only the configuration, counts and per-layer lengths are restored.
PrefillTrace read_trace_csv(std::istream& is);

void write_cost_csv(std::ostream& os, const CostReport& report);
std::string cost_json(const CostReport& report);

/// Layout CSV: header "window,n_v,n_a".
WindowLayout read_layout_csv(std::istream& is);
void write_layout_csv(std::ostream& os, const WindowLayout& layout);

/// Relevance CSV: header "window,s_v,s_a[,s]". When the s column is absent it
/// is derived with the same rule as window_relevance.
RelevanceScores read_relevance_csv(std::istream& is, const WindowLayout& layout);

}  // namespace seats
