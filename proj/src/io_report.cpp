// SPDX-License-Identifier: Apache-2.0

#include <cstdio>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>

#include "json.hpp"
#include "seats/io.hpp"

namespace seats {

using nlohmann::json;

namespace {

std::string num(double v, const char* format = "%.12g") {
    char buf[64];
    std::snprintf(buf, sizeof buf, format, v);
    return buf;
}

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::string cur;
    std::istringstream is(s);
    while (std::getline(is, cur, sep)) {
        out.push_back(cur);
    }
    if (!s.empty() && s.back() == sep) {
        out.emplace_back();
    }
    return out;
}

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) {
        return {};
    }
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

double to_double(const std::string& s, const std::string& ctx) {
    try {
        std::size_t used = 0;
        const double v = std::stod(s, &used);
        if (used != s.size()) {
            throw std::invalid_argument(s);
        }
        return v;
    } catch (const std::exception&) {
        throw Error(ctx + ": '" + s + "' is not a number");
    }
}

std::int64_t to_int(const std::string& s, const std::string& ctx) {
    try {
        std::size_t used = 0;
        const long long v = std::stoll(s, &used);
        if (used != s.size()) {
            throw std::invalid_argument(s);
        }
        return v;
    } catch (const std::exception&) {
        throw Error(ctx + ": '" + s + "' is not an integer");
    }
}

/// Reads data rows of a CSV with the expected header, skipping '#' comments.
std::vector<std::vector<std::string>> read_csv(std::istream& is, const std::vector<std::string>& header,
                                               std::map<std::string, std::string>* meta, const std::string& what) {
    std::string line;
    bool have_header = false;
    std::vector<std::vector<std::string>> rows;
    while (std::getline(is, line)) {
        line = trim(line);
        if (line.empty()) {
            continue;
        }
        if (line[0] == '#') {
            if (meta != nullptr) {
                std::istringstream ls(line.substr(1));
                std::string tok;
                while (ls >> tok) {
                    const auto eq = tok.find('=');
                    if (eq != std::string::npos) {
                        (*meta)[tok.substr(0, eq)] = tok.substr(eq + 1);
                    }
                }
            }
            continue;
        }
        auto cells = split(line, ',');
        for (auto& c : cells) {
            c = trim(c);
        }
        if (!have_header) {
            const bool prefix_ok = cells.size() >= header.size() &&
                                   std::equal(header.begin(), header.end(), cells.begin());
            if (!prefix_ok) {
                throw Error(what + ": expected header starting with '" + header.front() + "'");
            }
            have_header = true;
            rows.push_back(cells);
            continue;
        }
        rows.push_back(std::move(cells));
    }
    if (!have_header) {
        throw Error(what + ": missing header row");
    }
    return rows;
}

std::vector<int> boundary_list(const LayerBoundaries& b) { return {b.shallow_end, b.mid1, b.mid2, b.late_start}; }

}  // namespace

void write_schedule_csv(std::ostream& os, const SchedulePlan& v, const SchedulePlan& a) {
    os << "# C=" << num(v.c, "%.3f") << " C_exact=" << num(v.c, "%.17g") << '\n';
    if (v.delta == a.delta && v.r_s == a.r_s) {
        os << "# delta=" << num(v.delta, "%.4f") << " delta_exact=" << num(v.delta, "%.17g") << '\n';
    } else {
        os << "# delta_v=" << num(v.delta, "%.4f") << " delta_v_exact=" << num(v.delta, "%.17g") << '\n';
        os << "# delta_a=" << num(a.delta, "%.4f") << " delta_a_exact=" << num(a.delta, "%.17g") << '\n';
    }
    os << "layer,block,trr_v,trr_a\n";
    for (int layer = 1; layer <= v.layers(); ++layer) {
        os << layer << ',' << to_string(block_of(layer, v.boundaries)) << ',' << num(v.at(layer)) << ','
           << num(a.at(layer)) << '\n';
    }
}

std::string schedule_json(const SchedulePlan& v, const SchedulePlan& a) {
    auto one = [](const SchedulePlan& p) {
        return json{{"delta", p.delta},
                    {"C", p.c},
                    {"r_s", p.r_s},
                    {"r_m", p.r_m},
                    {"drop_layers", p.drop_layers},
                    {"per_layer_trr", p.per_layer_trr}};
    };
    return json{{"boundaries", boundary_list(v.boundaries)}, {"visual", one(v)}, {"audio", one(a)}}.dump(2);
}

void write_budget_csv(std::ostream& os, const BudgetPlan& plan) {
    os << "window,B,B_v,B_a\n";
    for (std::size_t t = 0; t < plan.windows(); ++t) {
        os << t << ',' << plan.b[t] << ',' << plan.b_v[t] << ',' << plan.b_a[t] << '\n';
    }
}

std::string budget_json(const BudgetPlan& plan) {
    return json{{"B", plan.b},
                {"B_v", plan.b_v},
                {"B_a", plan.b_a},
                {"B_real", plan.b_real},
                {"B_v_real", plan.b_v_real},
                {"B_a_real", plan.b_a_real},
                {"totals", {{"visual", plan.total_v()}, {"audio", plan.total_a()}, {"total", plan.total()}}}}
        .dump(2);
}

void write_trace_csv(std::ostream& os, const PrefillTrace& t) {
    const auto& c = t.config;
    const auto& b = c.boundaries;
    os << "# seats-trace v1\n";
    os << "# layers=" << c.layers << " d_model=" << c.d_model << " d_ff=" << c.d_ff << " n_heads=" << c.n_heads
       << " boundaries=" << b.shallow_end << ',' << b.mid1 << ',' << b.mid2 << ',' << b.late_start << '\n';
    os << "# windows=" << t.windows << " n_visual=" << t.n_v << " n_audio=" << t.n_a << " n_text=" << t.n_q << '\n';
    os << "# ratio=" << num(t.spec.ratio, "%.17g") << " ratio_v=" << num(t.spec.ratio_v, "%.17g")
       << " ratio_a=" << num(t.spec.ratio_a, "%.17g") << " lambda=" << num(t.spec.lambda, "%.17g")
       << " tau=" << num(t.spec.tau, "%.17g") << '\n';
    os << "# attention=" << t.attention_source << '\n';
    os << "layer,block,seq_len,visual,audio,text,event\n";
    std::map<int, const DropRecord*> drops;
    for (const auto& d : t.drops) {
        drops[d.layer] = &d;
    }
    for (int layer = 1; layer <= t.layers(); ++layer) {
        const auto i = static_cast<std::size_t>(layer - 1);
        const char* event = "";
        if (auto it = drops.find(layer); it != drops.end()) {
            event = it->second->late ? "late" : "drop";
        } else if (layer == 1) {
            event = "stage1";
        }
        os << layer << ',' << to_string(block_of(layer, b)) << ',' << t.seq_len[i] << ',' << t.visual[i] << ','
           << t.audio[i] << ',' << t.seq_len[i] - t.visual[i] - t.audio[i] << ',' << event << '\n';
    }
}

std::string trace_json(const PrefillTrace& t) {
    json drops = json::array();
    for (const auto& d : t.drops) {
        json entry{{"layer", d.layer}, {"r_v", d.r_v}, {"r_a", d.r_a}, {"late", d.late}};
        if (!d.late) {
            entry["S"] = d.relevance.s;
            entry["S_v"] = d.relevance.s_v;
            entry["S_a"] = d.relevance.s_a;
            entry["B"] = d.plan.b;
            entry["B_v"] = d.plan.b_v;
            entry["B_a"] = d.plan.b_a;
        }
        drops.push_back(std::move(entry));
    }
    json stage1 = json::array();
    for (const auto& w : t.stage1.per_window_kept) {
        stage1.push_back({w[0], w[1]});
    }
    return json{{"config", json::parse(to_json(t.config))},
                {"spec", json::parse(to_json(t.spec))},
                {"windows", t.windows},
                {"counts", {{"visual", t.n_v}, {"audio", t.n_a}, {"text", t.n_q}}},
                {"seq_len", t.seq_len},
                {"visual", t.visual},
                {"audio", t.audio},
                {"stage1_per_window", stage1},
                {"drops", drops},
                {"attention", t.attention_source}}
        .dump(2);
}

PrefillTrace read_trace_csv(std::istream& is) {
    const std::string what = "trace";
    std::map<std::string, std::string> meta;
    const auto rows = read_csv(is, {"layer", "block", "seq_len", "visual", "audio", "text"}, &meta, what);
    auto need = [&](const char* key) -> const std::string& {
        auto it = meta.find(key);
        if (it == meta.end()) {
            throw Error("trace: missing header field '" + std::string(key) + "'");
        }
        return it->second;
    };
    PrefillTrace t;
    t.config.layers = static_cast<int>(to_int(need("layers"), what));
    t.config.d_model = to_int(need("d_model"), what);
    t.config.d_ff = to_int(need("d_ff"), what);
    t.config.n_heads = static_cast<int>(to_int(need("n_heads"), what));
    const auto b = split(need("boundaries"), ',');
    if (b.size() != 4) {
        throw Error("trace: boundaries needs 4 entries");
    }
    t.config.boundaries = LayerBoundaries{static_cast<int>(to_int(b[0], what)), static_cast<int>(to_int(b[1], what)),
                                          static_cast<int>(to_int(b[2], what)), static_cast<int>(to_int(b[3], what))};
    t.config.validate();
    t.windows = static_cast<std::size_t>(to_int(need("windows"), what));
    t.n_v = to_int(need("n_visual"), what);
    t.n_a = to_int(need("n_audio"), what);
    t.n_q = to_int(need("n_text"), what);
    t.spec.ratio = to_double(need("ratio"), what);
    t.spec.ratio_v = to_double(need("ratio_v"), what);
    t.spec.ratio_a = to_double(need("ratio_a"), what);
    t.spec.lambda = to_double(need("lambda"), what);
    t.spec.tau = to_double(need("tau"), what);
    if (auto it = meta.find("attention"); it != meta.end()) {
        t.attention_source = it->second;
    }
    for (std::size_t r = 1; r < rows.size(); ++r) {
        const auto& cells = rows[r];
        if (cells.size() < 6) {
            throw Error("trace: row " + std::to_string(r) + " has too few columns");
        }
        if (to_int(cells[0], what) != static_cast<std::int64_t>(r)) {
            throw Error("trace: layers must be listed 1..L in order");
        }
        t.seq_len.push_back(to_int(cells[2], what));
        t.visual.push_back(to_int(cells[3], what));
        t.audio.push_back(to_int(cells[4], what));
        if (cells.size() > 6 && (cells[6] == "drop" || cells[6] == "late")) {
            DropRecord d;
            d.layer = static_cast<int>(r);
            d.late = cells[6] == "late";
            t.drops.push_back(std::move(d));
        }
    }
    if (t.layers() != t.config.layers) {
        throw Error("trace: " + std::to_string(t.layers()) + " layer rows for a " + std::to_string(t.config.layers) +
                    "-layer config");
    }
    return t;
}

void write_cost_csv(std::ostream& os, const CostReport& r) {
    os << "# flops_model=" << '"' << kFlopsModel << '"' << '\n';
    os << "# flops_total=" << num(r.flops_total, "%.17g") << " full_flops=" << num(r.full_flops, "%.17g")
       << " ratio_vs_full=" << num(r.ratio_vs_full, "%.17g") << " peak_kv_tokens=" << r.peak_kv_tokens << '\n';
    os << "layer,seq_len,flops,kv_tokens\n";
    for (std::size_t l = 0; l < r.flops_per_layer.size(); ++l) {
        os << l + 1 << ',' << r.kv_tokens_per_layer[l] << ',' << num(r.flops_per_layer[l], "%.17g") << ','
           << r.kv_tokens_per_layer[l] << '\n';
    }
}

std::string cost_json(const CostReport& r) {
    return json{{"flops_model", kFlopsModel},
                {"flops_total", r.flops_total},
                {"full_flops", r.full_flops},
                {"ratio_vs_full", r.ratio_vs_full},
                {"peak_kv_tokens", r.peak_kv_tokens},
                {"flops_per_layer", r.flops_per_layer},
                {"kv_tokens_per_layer", r.kv_tokens_per_layer}}
        .dump(2);
}

WindowLayout read_layout_csv(std::istream& is) {
    const std::string what = "layout";
    const auto rows = read_csv(is, {"window", "n_v", "n_a"}, nullptr, what);
    WindowLayout l;
    for (std::size_t r = 1; r < rows.size(); ++r) {
        if (rows[r].size() < 3 || to_int(rows[r][0], what) != static_cast<std::int64_t>(r - 1)) {
            throw Error("layout: rows must list windows 0..T-1 in order");
        }
        l.n_v.push_back(to_int(rows[r][1], what));
        l.n_a.push_back(to_int(rows[r][2], what));
    }
    if (l.windows() == 0) {
        throw Error("layout: no windows");
    }
    return l;
}

void write_layout_csv(std::ostream& os, const WindowLayout& layout) {
    os << "window,n_v,n_a\n";
    for (std::size_t t = 0; t < layout.windows(); ++t) {
        os << t << ',' << layout.n_v[t] << ',' << layout.n_a[t] << '\n';
    }
}

RelevanceScores read_relevance_csv(std::istream& is, const WindowLayout& layout) {
    const std::string what = "relevance";
    const auto rows = read_csv(is, {"window", "s_v", "s_a"}, nullptr, what);
    const bool has_s = rows.front().size() > 3 && rows.front()[3] == "s";
    RelevanceScores rel;
    for (std::size_t r = 1; r < rows.size(); ++r) {
        if (rows[r].size() < 3 || to_int(rows[r][0], what) != static_cast<std::int64_t>(r - 1)) {
            throw Error("relevance: rows must list windows 0..T-1 in order");
        }
        rel.s_v.push_back(to_double(rows[r][1], what));
        rel.s_a.push_back(to_double(rows[r][2], what));
        if (has_s) {
            if (rows[r].size() < 4) {
                throw Error("relevance: row " + std::to_string(r) + " lacks the s column");
            }
            rel.s.push_back(to_double(rows[r][3], what));
        }
    }
    if (rel.s_v.size() != layout.windows()) {
        throw Error("relevance: " + std::to_string(rel.s_v.size()) + " windows, layout has " +
                    std::to_string(layout.windows()));
    }
    if (!has_s) {
        rel.s = combine_window_weights(rel.s_v, rel.s_a, layout);
    }
    return rel;
}

}  // namespace seats
