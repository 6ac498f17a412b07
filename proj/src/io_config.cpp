// SPDX-License-Identifier: Apache-2.0

#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"
#include "seats/io.hpp"

namespace seats {

using nlohmann::json;

namespace {

json parse_object(const std::string& text, const char* what) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw Error(std::string(what) + ": invalid JSON: " + e.what());
    }
    if (!j.is_object()) {
        throw Error(std::string(what) + ": expected a JSON object");
    }
    return j;
}

void reject_unknown(const json& j, std::initializer_list<const char*> allowed, const char* what) {
    std::set<std::string> keys(allowed.begin(), allowed.end());
    for (const auto& [key, value] : j.items()) {
        if (!keys.contains(key)) {
            throw Error(std::string(what) + ": unknown key '" + key + "'");
        }
    }
}

template <typename T>
T field(const json& j, const char* key, const char* what) {
    if (!j.contains(key)) {
        throw Error(std::string(what) + ": missing key '" + key + "'");
    }
    try {
        return j.at(key).get<T>();
    } catch (const json::exception& e) {
        throw Error(std::string(what) + ": bad value for '" + key + "': " + e.what());
    }
}

template <typename T>
T field_or(const json& j, const char* key, T fallback, const char* what) {
    return j.contains(key) ? field<T>(j, key, what) : fallback;
}

}  // namespace

std::string read_text_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw Error("cannot open '" + path.string() + "'");
    }
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

ModelConfig parse_model_config(const std::string& text) {
    constexpr const char* what = "model config";
    const auto j = parse_object(text, what);
    reject_unknown(j, {"layers", "d_model", "d_ff", "n_heads", "boundaries"}, what);
    ModelConfig c;
    c.layers = field<int>(j, "layers", what);
    c.d_model = field<std::int64_t>(j, "d_model", what);
    c.d_ff = field<std::int64_t>(j, "d_ff", what);
    c.n_heads = field<int>(j, "n_heads", what);
    const auto b = field<std::vector<int>>(j, "boundaries", what);
    if (b.size() != 4) {
        throw Error("model config: 'boundaries' needs 4 entries [L_s, L_m1, L_m2, L_l]");
    }
    c.boundaries = LayerBoundaries{b[0], b[1], b[2], b[3]};
    c.validate();
    return c;
}

RetentionSpec parse_retention_spec(const std::string& text) {
    constexpr const char* what = "retention spec";
    const auto j = parse_object(text, what);
    reject_unknown(j, {"ratio", "ratio_v", "ratio_a", "lambda", "tau"}, what);
    RetentionSpec s;
    const bool per_modality = j.contains("ratio_v") || j.contains("ratio_a");
    if (per_modality) {
        s.ratio_v = field<double>(j, "ratio_v", what);
        s.ratio_a = field<double>(j, "ratio_a", what);
        s.ratio = field_or<double>(j, "ratio", s.ratio_v, what);
    } else {
        s.ratio = field<double>(j, "ratio", what);
        s.ratio_v = s.ratio;
        s.ratio_a = s.ratio;
    }
    s.lambda = field_or<double>(j, "lambda", s.lambda, what);
    s.tau = field_or<double>(j, "tau", s.tau, what);
    s.validate();
    return s;
}

SynthSpec parse_synth_spec(const std::string& text) {
    constexpr const char* what = "synth spec";
    const auto j = parse_object(text, what);
    reject_unknown(j,
                   {"seed", "windows", "dim", "n_v", "n_a", "n_q", "planted_windows", "planted_gain", "clusters",
                    "noise"},
                   what);
    SynthSpec s;
    s.seed = field<std::uint64_t>(j, "seed", what);
    s.windows = field_or<std::size_t>(j, "windows", s.windows, what);
    s.dim = field_or<std::size_t>(j, "dim", s.dim, what);
    s.n_v = field_or<std::int64_t>(j, "n_v", s.n_v, what);
    s.n_a = field_or<std::int64_t>(j, "n_a", s.n_a, what);
    s.n_q = field_or<std::int64_t>(j, "n_q", s.n_q, what);
    s.planted_windows = field_or<std::vector<std::size_t>>(j, "planted_windows", s.planted_windows, what);
    s.planted_gain = field_or<double>(j, "planted_gain", s.planted_gain, what);
    s.clusters = field_or<std::size_t>(j, "clusters", s.clusters, what);
    s.noise = field_or<double>(j, "noise", s.noise, what);
    s.validate();
    return s;
}

std::string to_json(const ModelConfig& c) {
    const auto& b = c.boundaries;
    json j{{"layers", c.layers},
           {"d_model", c.d_model},
           {"d_ff", c.d_ff},
           {"n_heads", c.n_heads},
           {"boundaries", {b.shallow_end, b.mid1, b.mid2, b.late_start}}};
    return j.dump();
}

std::string to_json(const RetentionSpec& s) {
    json j{{"ratio", s.ratio}, {"ratio_v", s.ratio_v}, {"ratio_a", s.ratio_a}, {"lambda", s.lambda}, {"tau", s.tau}};
    return j.dump();
}

std::string to_json(const SynthSpec& s) {
    json j{{"seed", s.seed},
           {"windows", s.windows},
           {"dim", s.dim},
           {"n_v", s.n_v},
           {"n_a", s.n_a},
           {"n_q", s.n_q},
           {"planted_windows", s.planted_windows},
           {"planted_gain", s.planted_gain},
           {"clusters", s.clusters},
           {"noise", s.noise}};
    return j.dump();
}

}  // namespace seats
