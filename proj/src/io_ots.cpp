// SPDX-License-Identifier: Apache-2.0

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>
#include <sstream>

#include "json.hpp"
#include "seats/io.hpp"

namespace seats {

using nlohmann::json;

namespace {

constexpr std::size_t kPreamble = 12;  // magic (4) + header length (8)

void put_u64(std::vector<std::uint8_t>& out, std::uint64_t v) {
    for (int i = 0; i < 8; ++i) {
        out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
    }
}

void put_f32(std::vector<std::uint8_t>& out, float f) {
    const auto v = std::bit_cast<std::uint32_t>(f);
    for (int i = 0; i < 4; ++i) {
        out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
    }
}

std::uint64_t get_u64(const std::uint8_t* p) {
    std::uint64_t v = 0;
    for (int i = 7; i >= 0; --i) {
        v = (v << 8) | p[i];
    }
    return v;
}

float get_f32(const std::uint8_t* p) {
    std::uint32_t v = 0;
    for (int i = 3; i >= 0; --i) {
        v = (v << 8) | p[i];
    }
    return std::bit_cast<float>(v);
}

const char* modality_name(Modality m) { return to_string(m); }

Modality modality_from_name(const std::string& s, std::uint64_t offset) {
    if (s == "visual") {
        return Modality::visual;
    }
    if (s == "audio") {
        return Modality::audio;
    }
    throw OtsError(OtsError::Kind::bad_header, offset, "unknown section modality '" + s + "'");
}

struct SectionDesc {
    std::string kind;
    std::int32_t window = 0;
    Modality modality = Modality::visual;
    std::uint64_t rows = 0;
    std::uint64_t cols = 0;
};

}  // namespace

OtsError::OtsError(Kind kind, std::uint64_t offset, const std::string& what)
    : Error("OTS error at byte " + std::to_string(offset) + ": " + what), m_kind(kind), m_offset(offset), m_detail(what) {}

std::vector<std::uint8_t> encode_ots(const OtsContainer& c) {
    const auto& s = c.stream;
    const auto report = validate_stream(s, s.layout(c.windows));
    if (!report.ok()) {
        throw Error("write_ots: invalid stream: " + report.violations.front());
    }

    json header;
    header["version"] = kOtsVersion;
    header["N"] = s.size();
    header["d"] = s.dim();
    header["T"] = c.windows;
    header["counts"] = {{"visual", s.count(Modality::visual)},
                        {"audio", s.count(Modality::audio)},
                        {"text", s.count(Modality::text)}};
    std::vector<int> codes;
    codes.reserve(s.size());
    for (auto m : s.modality) {
        codes.push_back(static_cast<int>(m));
    }
    header["modality"] = codes;
    header["window"] = s.window_id;
    header["position"] = s.position;
    header["generator"] = c.generator;

    json sections = json::array();
    for (const auto& [key, values] : c.saliency) {
        sections.push_back({{"kind", "saliency"},
                            {"window", key.first},
                            {"modality", modality_name(key.second)},
                            {"rows", values.size()},
                            {"cols", 1}});
    }
    for (const auto& [key, m] : c.attention) {
        sections.push_back({{"kind", "attention"},
                            {"window", key.first},
                            {"modality", modality_name(key.second)},
                            {"rows", m.rows()},
                            {"cols", m.cols()}});
    }
    if (c.query) {
        sections.push_back({{"kind", "query"}, {"rows", 1}, {"cols", c.query->size()}});
    }
    header["sections"] = sections;

    const std::string text = header.dump();
    std::vector<std::uint8_t> out;
    out.reserve(kPreamble + text.size() + s.embeddings.data().size() * 4);
    for (char ch : {'O', 'T', 'S', static_cast<char>('0' + kOtsVersion)}) {
        out.push_back(static_cast<std::uint8_t>(ch));
    }
    put_u64(out, text.size());
    out.insert(out.end(), text.begin(), text.end());
    for (float f : s.embeddings.data()) {
        put_f32(out, f);
    }
    auto put_section = [&out](std::span<const float> values) {
        put_u64(out, values.size() * 4);
        for (float f : values) {
            put_f32(out, f);
        }
    };
    for (const auto& [key, values] : c.saliency) {
        put_section(values);
    }
    for (const auto& [key, m] : c.attention) {
        put_section(m.data());
    }
    if (c.query) {
        put_section(*c.query);
    }
    return out;
}

OtsContainer decode_ots(const std::vector<std::uint8_t>& bytes) {
    using Kind = OtsError::Kind;
    if (bytes.size() < 4 || std::memcmp(bytes.data(), "OTS", 3) != 0) {
        throw OtsError(Kind::bad_magic, 0, "missing 'OTS' magic");
    }
    if (bytes[3] != static_cast<std::uint8_t>('0' + kOtsVersion)) {
        throw OtsError(Kind::unsupported_version, 3,
                       std::string("unsupported version 'OTS") + static_cast<char>(bytes[3]) + "'");
    }
    if (bytes.size() < kPreamble) {
        throw OtsError(Kind::truncated, bytes.size(), "file ends inside the header length field");
    }
    const std::uint64_t header_len = get_u64(bytes.data() + 4);
    if (header_len > bytes.size() - kPreamble) {
        throw OtsError(Kind::truncated, kPreamble,
                       "header declares " + std::to_string(header_len) + " bytes, only " +
                           std::to_string(bytes.size() - kPreamble) + " remain");
    }
    json header;
    try {
        header = json::parse(bytes.begin() + kPreamble, bytes.begin() + static_cast<std::ptrdiff_t>(kPreamble + header_len));
    } catch (const json::exception& e) {
        throw OtsError(Kind::bad_header, kPreamble, std::string("header is not valid JSON: ") + e.what());
    }

    OtsContainer c;
    std::uint64_t n = 0;
    std::uint64_t d = 0;
    std::vector<int> codes;
    json sections;
    try {
        if (header.at("version").get<int>() != kOtsVersion) {
            throw OtsError(Kind::unsupported_version, kPreamble,
                           "header version " + header.at("version").dump() + " is not supported");
        }
        n = header.at("N").get<std::uint64_t>();
        d = header.at("d").get<std::uint64_t>();
        c.windows = header.at("T").get<std::size_t>();
        codes = header.at("modality").get<std::vector<int>>();
        c.stream.window_id = header.at("window").get<std::vector<std::int32_t>>();
        c.stream.position = header.at("position").get<std::vector<std::int64_t>>();
        if (header.contains("generator") && !header.at("generator").is_null()) {
            c.generator = header.at("generator").get<std::map<std::string, std::string>>();
        }
        sections = header.value("sections", json::array());
        const auto& counts = header.at("counts");
        const auto declared_v = counts.at("visual").get<std::uint64_t>();
        const auto declared_a = counts.at("audio").get<std::uint64_t>();
        const auto declared_q = counts.at("text").get<std::uint64_t>();
        if (codes.size() != n || c.stream.window_id.size() != n || c.stream.position.size() != n) {
            throw OtsError(Kind::count_mismatch, kPreamble,
                           "per-token arrays (" + std::to_string(codes.size()) + ", " +
                               std::to_string(c.stream.window_id.size()) + ", " +
                               std::to_string(c.stream.position.size()) + ") do not match N = " + std::to_string(n));
        }
        std::uint64_t tally[3] = {0, 0, 0};
        for (int code : codes) {
            if (code < 0 || code > 2) {
                throw OtsError(Kind::bad_header, kPreamble, "modality code " + std::to_string(code) + " out of range");
            }
            ++tally[code];
        }
        if (tally[0] != declared_v || tally[1] != declared_a || tally[2] != declared_q) {
            throw OtsError(Kind::count_mismatch, kPreamble,
                           "declared counts (" + std::to_string(declared_v) + ", " + std::to_string(declared_a) + ", " +
                               std::to_string(declared_q) + ") do not match modality codes (" +
                               std::to_string(tally[0]) + ", " + std::to_string(tally[1]) + ", " +
                               std::to_string(tally[2]) + ")");
        }
    } catch (const json::exception& e) {
        throw OtsError(Kind::bad_header, kPreamble, std::string("malformed header field: ") + e.what());
    }

    std::uint64_t offset = kPreamble + header_len;
    const std::uint64_t remaining = bytes.size() - offset;
    if (d != 0 && n > remaining / 4 / d) {
        throw OtsError(Kind::size_mismatch, offset,
                       "payload needs " + std::to_string(n * d * 4) + " bytes, file has " + std::to_string(remaining));
    }
    const std::uint64_t payload = n * d * 4;
    std::vector<float> data(n * d);
    for (std::uint64_t i = 0; i < n * d; ++i) {
        data[i] = get_f32(bytes.data() + offset + 4 * i);
    }
    offset += payload;
    c.stream.embeddings = Matrix(n, d, std::move(data));
    c.stream.modality.reserve(n);
    for (int code : codes) {
        c.stream.modality.push_back(static_cast<Modality>(code));
    }

    try {
        for (const auto& sj : sections) {
            SectionDesc desc;
            desc.kind = sj.at("kind").get<std::string>();
            desc.rows = sj.at("rows").get<std::uint64_t>();
            desc.cols = sj.at("cols").get<std::uint64_t>();
            if (desc.kind != "query") {
                desc.window = sj.at("window").get<std::int32_t>();
                desc.modality = modality_from_name(sj.at("modality").get<std::string>(), kPreamble);
            }
            if (bytes.size() - offset < 8) {
                throw OtsError(Kind::truncated, offset, "section '" + desc.kind + "' length prefix missing");
            }
            const std::uint64_t len = get_u64(bytes.data() + offset);
            offset += 8;
            if (desc.cols != 0 && desc.rows > (bytes.size() - offset) / 4 / desc.cols) {
                throw OtsError(Kind::size_mismatch, offset,
                               "section '" + desc.kind + "' needs " + std::to_string(desc.rows * desc.cols * 4) +
                                   " bytes, file has " + std::to_string(bytes.size() - offset));
            }
            if (len != desc.rows * desc.cols * 4) {
                throw OtsError(Kind::size_mismatch, offset - 8,
                               "section '" + desc.kind + "' length prefix " + std::to_string(len) +
                                   " != declared " + std::to_string(desc.rows * desc.cols * 4));
            }
            std::vector<float> values(desc.rows * desc.cols);
            for (std::uint64_t i = 0; i < values.size(); ++i) {
                values[i] = get_f32(bytes.data() + offset + 4 * i);
            }
            offset += len;
            const GroupKey key{desc.window, desc.modality};
            if (desc.kind == "saliency") {
                c.saliency[key] = std::move(values);
            } else if (desc.kind == "attention") {
                c.attention[key] = Matrix(desc.rows, desc.cols, std::move(values));
            } else if (desc.kind == "query") {
                c.query = std::move(values);
            } else {
                throw OtsError(Kind::bad_header, kPreamble, "unknown section kind '" + desc.kind + "'");
            }
        }
    } catch (const json::exception& e) {
        throw OtsError(Kind::bad_header, kPreamble, std::string("malformed section entry: ") + e.what());
    }
    if (offset != bytes.size()) {
        throw OtsError(Kind::size_mismatch, offset,
                       "expected " + std::to_string(offset) + " bytes, file has " + std::to_string(bytes.size()));
    }
    const auto report = validate_stream(c.stream, c.stream.layout(c.windows));
    if (!report.ok()) {
        throw OtsError(Kind::count_mismatch, kPreamble, "stream invariants violated: " + report.violations.front());
    }
    return c;
}

void write_ots(const std::filesystem::path& path, const OtsContainer& c) {
    const auto bytes = encode_ots(c);
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw OtsError(OtsError::Kind::io, 0, "cannot open '" + path.string() + "' for writing");
    }
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) {
        throw OtsError(OtsError::Kind::io, 0, "write to '" + path.string() + "' failed");
    }
}

OtsContainer read_ots(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw OtsError(OtsError::Kind::io, 0, "cannot open '" + path.string() + "'");
    }
    std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    try {
        return decode_ots(bytes);
    } catch (const OtsError& e) {
        throw OtsError(e.kind(), e.offset(), path.string() + ": " + e.detail());
    }
}

GroupSaliency saliency_of(const OtsContainer& c) {
    GroupSaliency out;
    for (const auto& [key, values] : c.saliency) {
        out[key] = SaliencyVector(values.begin(), values.end());
    }
    for (const auto& [key, attn] : c.attention) {
        if (!out.contains(key)) {
            out[key] = mean_received_attention(attn);
        }
    }
    return out;
}

}  // namespace seats
