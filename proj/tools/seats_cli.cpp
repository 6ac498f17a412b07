// SPDX-License-Identifier: Apache-2.0

#include <cstdio>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "seats/io.hpp"
#include "seats/pipeline.hpp"

namespace {

using namespace seats;

class UsageError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// "35" and "0.35" both mean 35%.
double parse_ratio(const std::string& text, const char* flag) {
    double v = 0.0;
    try {
        std::size_t used = 0;
        v = std::stod(text, &used);
        if (used != text.size()) {
            throw std::invalid_argument(text);
        }
    } catch (const std::exception&) {
        throw UsageError(std::string(flag) + ": '" + text + "' is not a number");
    }
    if (v > 1.0) {
        v /= 100.0;
    }
    if (v < 0.0 || v > 1.0) {
        throw UsageError(std::string(flag) + ": ratio out of range: " + text);
    }
    return v;
}

std::vector<std::string> split_list(const std::string& text) {
    std::vector<std::string> out;
    std::string cur;
    std::istringstream is(text);
    while (std::getline(is, cur, ',')) {
        out.push_back(cur);
    }
    return out;
}

LayerBoundaries parse_boundaries(const std::string& text) {
    const auto parts = split_list(text);
    if (parts.size() != 4) {
        throw UsageError("--boundaries expects L_s,L_m1,L_m2,L_l; got '" + text + "'");
    }
    int v[4];
    for (int i = 0; i < 4; ++i) {
        try {
            std::size_t used = 0;
            v[i] = std::stoi(parts[static_cast<std::size_t>(i)], &used);
            if (used != parts[static_cast<std::size_t>(i)].size()) {
                throw std::invalid_argument(text);
            }
        } catch (const std::exception&) {
            throw UsageError("--boundaries: '" + parts[static_cast<std::size_t>(i)] + "' is not an integer");
        }
    }
    return LayerBoundaries{v[0], v[1], v[2], v[3]};
}

std::pair<double, double> parse_ratio_pair(const std::string& text, const char* flag) {
    const auto parts = split_list(text);
    if (parts.size() != 2) {
        throw UsageError(std::string(flag) + " expects two comma-separated ratios; got '" + text + "'");
    }
    return {parse_ratio(parts[0], flag), parse_ratio(parts[1], flag)};
}

/// Writes to `path`, or stdout when empty.
template <typename F>
void emit(const std::string& path, F&& body) {
    if (path.empty() || path == "-") {
        body(std::cout);
        return;
    }
    std::ofstream out(path, std::ios::trunc);
    if (!out) {
        throw Error("cannot open '" + path + "' for writing");
    }
    body(out);
}

void write_text(const std::string& path, const std::string& text) {
    emit(path, [&](std::ostream& os) { os << text << '\n'; });
}

std::string fixed(double v, const char* format = "%.6f") {
    char buf[64];
    std::snprintf(buf, sizeof buf, format, v);
    return buf;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"seats: stage-adaptive token selection for omni-modal prefill"};
    app.require_subcommand(1);

    // schedule
    auto* sched = app.add_subcommand("schedule", "Per-layer token retention schedule as CSV");
    int layers = 0;
    std::string boundaries_text;
    std::string ratio_text;
    double lambda = 1.4;
    std::string modality_ratios;
    std::string sched_out;
    bool sched_json = false;
    sched->add_option("--layers", layers, "LLM layer count L")->required();
    sched->add_option("--boundaries", boundaries_text, "L_s,L_m1,L_m2,L_l")->required();
    sched->add_option("--ratio", ratio_text, "Overall retention ratio R (fraction or percent)")->required();
    sched->add_option("--lambda", lambda, "Shallow-block scale factor");
    sched->add_option("--modality-ratios", modality_ratios, "R_v,R_a; schedules each modality separately");
    sched->add_option("--out", sched_out, "Output file (default stdout)");
    sched->add_flag("--json", sched_json, "Emit JSON instead of CSV");

    // gen
    auto* gen = app.add_subcommand("gen", "Generate a synthetic token stream container");
    std::string gen_synth;
    std::string gen_out;
    bool gen_no_saliency = false;
    gen->add_option("--synth", gen_synth, "Synthetic stream spec (JSON)")->required();
    gen->add_option("--out", gen_out, "Output .ots path")->required();
    gen->add_flag("--no-saliency", gen_no_saliency, "Omit per-group encoder saliency sections");

    // prune-pre
    auto* pre = app.add_subcommand("prune-pre", "Stage I weighted diversity pruning");
    std::string pre_input;
    std::string pre_spec;
    std::string pre_out;
    unsigned pre_threads = 1;
    pre->add_option("--input", pre_input, "Token stream container (.ots)")->required();
    pre->add_option("--spec", pre_spec, "Retention spec (JSON)")->required();
    pre->add_option("--out", pre_out, "Kept-index list (default stdout)");
    pre->add_option("--threads", pre_threads, "Worker threads");

    // allocate
    auto* alloc = app.add_subcommand("allocate", "Top-down budget allocation for one drop layer");
    std::string alloc_rel;
    std::string alloc_layout;
    std::string alloc_ratios;
    std::string alloc_base;
    std::string alloc_out;
    bool alloc_json = false;
    alloc->add_option("--relevance", alloc_rel, "Relevance CSV (window,s_v,s_a[,s])")->required();
    alloc->add_option("--layout", alloc_layout, "Current layout CSV (window,n_v,n_a)")->required();
    alloc->add_option("--ratios", alloc_ratios, "r_v,r_a at this layer")->required();
    alloc->add_option("--base", alloc_base, "N_v,N_a the ratios refer to (default: layout totals)");
    alloc->add_option("--out", alloc_out, "Output file (default stdout)");
    alloc->add_flag("--json", alloc_json, "Emit JSON instead of CSV");

    // run
    auto* run = app.add_subcommand("run", "Run all three stages over a mock prefill");
    std::string run_config;
    std::string run_spec;
    std::string run_input;
    std::string run_synth;
    std::string run_trace;
    std::string run_json;
    unsigned run_threads = 1;
    run->add_option("--config", run_config, "Model config (JSON)")->required();
    run->add_option("--spec", run_spec, "Retention spec (JSON)")->required();
    auto* in_opt = run->add_option("--input", run_input, "Token stream container (.ots)");
    auto* synth_opt = run->add_option("--synth", run_synth, "Synthetic stream spec (JSON)");
    in_opt->excludes(synth_opt);
    run->add_option("--trace", run_trace, "Trace CSV output")->required();
    run->add_option("--json", run_json, "Also write a JSON trace here");
    run->add_option("--threads", run_threads, "Worker threads for Stage I");

    // flops
    auto* flops = app.add_subcommand("flops", "Analytic prefill FLOPs over a trace");
    std::string flops_trace;
    std::string flops_config;
    std::string flops_out;
    bool flops_json = false;
    flops->add_option("--trace", flops_trace, "Trace CSV written by `run`")->required();
    flops->add_option("--config", flops_config, "Override the model config recorded in the trace");
    flops->add_option("--out", flops_out, "Output file (default stdout)");
    flops->add_flag("--json", flops_json, "Emit JSON instead of CSV");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        if (sched->parsed()) {
            ModelConfig config{layers, 1, 1, 1, parse_boundaries(boundaries_text)};
            const double ratio = parse_ratio(ratio_text, "--ratio");
            double r_v = ratio;
            double r_a = ratio;
            if (!modality_ratios.empty()) {
                std::tie(r_v, r_a) = parse_ratio_pair(modality_ratios, "--modality-ratios");
            }
            try {
                config.validate();
            } catch (const Error& e) {
                throw UsageError(e.what());
            }
            const auto plan_v = modality_schedule(config, r_v, lambda);
            const auto plan_a = modality_schedule(config, r_a, lambda);
            if (sched_json) {
                write_text(sched_out, schedule_json(plan_v, plan_a));
            } else {
                emit(sched_out, [&](std::ostream& os) { write_schedule_csv(os, plan_v, plan_a); });
            }
        } else if (gen->parsed()) {
            const auto spec = parse_synth_spec(read_text_file(gen_synth));
            const auto out = synth_generate(spec);
            OtsContainer c;
            c.stream = out.stream;
            c.windows = spec.windows;
            c.generator = {{"algorithm", CounterRng::kAlgorithm},
                           {"seed", std::to_string(spec.seed)},
                           {"spec", to_json(spec)}};
            if (!gen_no_saliency) {
                for (const auto& [key, values] : encoder_saliency(out.attention, out.stream, spec.windows)) {
                    c.saliency[key] = std::vector<float>(values.begin(), values.end());
                }
            }
            write_ots(gen_out, c);
            std::cout << "wrote " << c.stream.size() << " tokens (visual " << c.stream.count(Modality::visual)
                      << ", audio " << c.stream.count(Modality::audio) << ", text "
                      << c.stream.count(Modality::text) << ") to " << gen_out << '\n';
        } else if (pre->parsed()) {
            const auto c = read_ots(pre_input);
            const auto spec = parse_retention_spec(read_text_file(pre_spec));
            const auto layout = c.stream.layout(c.windows);
            const auto sel = win_div_prune(c.stream, layout, saliency_of(c), spec, pre_threads);
            emit(pre_out, [&](std::ostream& os) {
                for (auto i : sel.kept) {
                    os << i << '\n';
                }
            });
            std::cout << "visual " << sel.kept_of(Modality::visual) << "/" << layout.total_visual() << " audio "
                      << sel.kept_of(Modality::audio) << "/" << layout.total_audio() << " text "
                      << c.stream.count(Modality::text) << " kept " << sel.kept.size() << "/" << c.stream.size()
                      << '\n';
        } else if (alloc->parsed()) {
            std::ifstream lf(alloc_layout);
            if (!lf) {
                throw Error("cannot open '" + alloc_layout + "'");
            }
            const auto layout = read_layout_csv(lf);
            std::ifstream rf(alloc_rel);
            if (!rf) {
                throw Error("cannot open '" + alloc_rel + "'");
            }
            const auto rel = read_relevance_csv(rf, layout);
            const auto [r_v, r_a] = parse_ratio_pair(alloc_ratios, "--ratios");
            std::int64_t base_v = layout.total_visual();
            std::int64_t base_a = layout.total_audio();
            if (!alloc_base.empty()) {
                const auto parts = split_list(alloc_base);
                if (parts.size() != 2) {
                    throw UsageError("--base expects N_v,N_a");
                }
                try {
                    base_v = std::stoll(parts[0]);
                    base_a = std::stoll(parts[1]);
                } catch (const std::exception&) {
                    throw UsageError("--base expects integers");
                }
            }
            const auto plan = allocate(rel, r_v, r_a, base_v, base_a, layout);
            if (alloc_json) {
                write_text(alloc_out, budget_json(plan));
            } else {
                emit(alloc_out, [&](std::ostream& os) { write_budget_csv(os, plan); });
            }
        } else if (run->parsed()) {
            if (run_input.empty() == run_synth.empty()) {
                throw UsageError("run: exactly one of --input or --synth is required");
            }
            const auto config = parse_model_config(read_text_file(run_config));
            const auto spec = parse_retention_spec(read_text_file(run_spec));
            PipelineResult result;
            if (!run_synth.empty()) {
                result = run_pipeline(parse_synth_spec(read_text_file(run_synth)), config, spec, run_threads);
            } else {
                const auto c = read_ots(run_input);
                const EmbeddingAttention attention(c.query);
                result = run_pipeline(c.stream, c.windows, attention, config, spec, saliency_of(c), run_threads);
            }
            emit(run_trace, [&](std::ostream& os) { write_trace_csv(os, result.trace); });
            if (!run_json.empty()) {
                write_text(run_json, trace_json(result.trace));
            }
            const auto mean = mean_retention(result.trace);
            const auto cost = trace_flops(result.trace, config);
            std::cout << "final_len=" << result.final_stream.size() << " mean_trr_v=" << fixed(mean.visual)
                      << " mean_trr_a=" << fixed(mean.audio) << " flops_ratio=" << fixed(cost.ratio_vs_full)
                      << '\n';
        } else if (flops->parsed()) {
            std::ifstream tf(flops_trace);
            if (!tf) {
                throw Error("cannot open '" + flops_trace + "'");
            }
            const auto trace = read_trace_csv(tf);
            const auto config =
                flops_config.empty() ? trace.config : parse_model_config(read_text_file(flops_config));
            const auto report = trace_flops(trace, config);
            if (flops_json) {
                write_text(flops_out, cost_json(report));
            } else {
                emit(flops_out, [&](std::ostream& os) { write_cost_csv(os, report); });
            }
            if (!flops_out.empty() && flops_out != "-") {
                std::cout << "flops_total=" << fixed(report.flops_total, "%.6e")
                          << " ratio_vs_full=" << fixed(report.ratio_vs_full) << '\n';
            }
        }
    } catch (const UsageError& e) {
        std::cerr << "usage error: " << e.what() << '\n';
        return 2;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
