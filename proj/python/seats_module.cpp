// SPDX-License-Identifier: Apache-2.0

#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "seats/allocator.hpp"
#include "seats/cost.hpp"
#include "seats/divprune.hpp"
#include "seats/io.hpp"
#include "seats/pipeline.hpp"
#include "seats/relevance.hpp"
#include "seats/schedule.hpp"
#include "seats/selector.hpp"

namespace py = pybind11;
using namespace seats;

namespace {

Matrix to_matrix(const py::array_t<float, py::array::c_style | py::array::forcecast>& a) {
    if (a.ndim() != 2) {
        throw py::value_error("expected a 2-D array");
    }
    const auto rows = static_cast<std::size_t>(a.shape(0));
    const auto cols = static_cast<std::size_t>(a.shape(1));
    return Matrix(rows, cols, std::vector<float>(a.data(), a.data() + rows * cols));
}

WindowLayout layout_of(std::vector<std::int64_t> n_v, std::vector<std::int64_t> n_a) {
    if (n_v.size() != n_a.size()) {
        throw py::value_error("n_v and n_a must have the same length");
    }
    return WindowLayout{std::move(n_v), std::move(n_a)};
}

py::dict trace_dict(const PrefillTrace& t) {
    py::dict d;
    d["seq_len"] = t.seq_len;
    d["visual"] = t.visual;
    d["audio"] = t.audio;
    d["shrink_layers"] = t.shrink_layers();
    d["trr_v"] = t.schedule_v.per_layer_trr;
    d["trr_a"] = t.schedule_a.per_layer_trr;
    d["stage1_kept"] = t.stage1.kept;
    py::list drops;
    for (const auto& r : t.drops) {
        py::dict x;
        x["layer"] = r.layer;
        x["late"] = r.late;
        x["budget"] = r.plan.b;
        x["relevance"] = r.relevance.s;
        drops.append(x);
    }
    d["drops"] = drops;
    const auto m = mean_retention(t);
    d["mean_trr_v"] = m.visual;
    d["mean_trr_a"] = m.audio;
    d["flops_ratio"] = trace_flops(t, t.config).ratio_vs_full;
    return d;
}

}  // namespace

PYBIND11_MODULE(_seats, m) {
    m.doc() = "Stage-adaptive token selection for omni-modal prefill";

    auto base = py::register_exception<Error>(m, "SeatsError", PyExc_RuntimeError);
    py::register_exception<InfeasibleError>(m, "InfeasibleError", base.ptr());

    py::class_<LayerBoundaries>(m, "LayerBoundaries")
        .def(py::init<int, int, int, int>(), py::arg("shallow_end"), py::arg("mid1"), py::arg("mid2"),
             py::arg("late_start"))
        .def_readwrite("shallow_end", &LayerBoundaries::shallow_end)
        .def_readwrite("mid1", &LayerBoundaries::mid1)
        .def_readwrite("mid2", &LayerBoundaries::mid2)
        .def_readwrite("late_start", &LayerBoundaries::late_start);

    py::class_<ModelConfig>(m, "ModelConfig")
        .def(py::init<>())
        .def_readwrite("layers", &ModelConfig::layers)
        .def_readwrite("d_model", &ModelConfig::d_model)
        .def_readwrite("d_ff", &ModelConfig::d_ff)
        .def_readwrite("n_heads", &ModelConfig::n_heads)
        .def_readwrite("boundaries", &ModelConfig::boundaries)
        .def("validate", &ModelConfig::validate)
        .def_static("qwen25_omni_7b", &ModelConfig::qwen25_omni_7b)
        .def("to_json", [](const ModelConfig& c) { return to_json(c); })
        .def_static("from_json", &parse_model_config);

    py::class_<RetentionSpec>(m, "RetentionSpec")
        .def(py::init([](double ratio, std::optional<double> ratio_v, std::optional<double> ratio_a, double lambda,
                         double tau) {
                 RetentionSpec s;
                 s.ratio = ratio;
                 s.ratio_v = ratio_v.value_or(ratio);
                 s.ratio_a = ratio_a.value_or(ratio);
                 s.lambda = lambda;
                 s.tau = tau;
                 s.validate();
                 return s;
             }),
             py::arg("ratio"), py::arg("ratio_v") = py::none(), py::arg("ratio_a") = py::none(),
             py::arg("lambda_") = 1.4, py::arg("tau") = 0.1)
        .def_readwrite("ratio", &RetentionSpec::ratio)
        .def_readwrite("ratio_v", &RetentionSpec::ratio_v)
        .def_readwrite("ratio_a", &RetentionSpec::ratio_a)
        .def_readwrite("lambda_", &RetentionSpec::lambda)
        .def_readwrite("tau", &RetentionSpec::tau);

    py::class_<SynthSpec>(m, "SynthSpec")
        .def(py::init<>())
        .def_readwrite("seed", &SynthSpec::seed)
        .def_readwrite("windows", &SynthSpec::windows)
        .def_readwrite("dim", &SynthSpec::dim)
        .def_readwrite("n_v", &SynthSpec::n_v)
        .def_readwrite("n_a", &SynthSpec::n_a)
        .def_readwrite("n_q", &SynthSpec::n_q)
        .def_readwrite("planted_windows", &SynthSpec::planted_windows)
        .def_readwrite("planted_gain", &SynthSpec::planted_gain)
        .def_readwrite("clusters", &SynthSpec::clusters)
        .def_readwrite("noise", &SynthSpec::noise);

    py::class_<SchedulePlan>(m, "SchedulePlan")
        .def_readonly("per_layer_trr", &SchedulePlan::per_layer_trr)
        .def_readonly("delta", &SchedulePlan::delta)
        .def_readonly("c", &SchedulePlan::c)
        .def_readonly("r_s", &SchedulePlan::r_s)
        .def_readonly("r_m", &SchedulePlan::r_m)
        .def_readonly("drop_layers", &SchedulePlan::drop_layers)
        .def("mean", &SchedulePlan::mean);

    py::class_<RelevanceScores>(m, "RelevanceScores")
        .def_readonly("s_v", &RelevanceScores::s_v)
        .def_readonly("s_a", &RelevanceScores::s_a)
        .def_readonly("s", &RelevanceScores::s)
        .def_readonly("tau", &RelevanceScores::tau);

    py::class_<BudgetPlan>(m, "BudgetPlan")
        .def_readonly("b", &BudgetPlan::b)
        .def_readonly("b_v", &BudgetPlan::b_v)
        .def_readonly("b_a", &BudgetPlan::b_a)
        .def_readonly("b_real", &BudgetPlan::b_real)
        .def_readonly("b_v_real", &BudgetPlan::b_v_real)
        .def_readonly("b_a_real", &BudgetPlan::b_a_real)
        .def("total", &BudgetPlan::total);

    m.def(
        "solve_delta",
        [](const ModelConfig& c, double ratio, double lambda) {
            const auto s = solve_delta(c, ratio, lambda);
            return py::make_tuple(s.delta, s.c);
        },
        py::arg("config"), py::arg("ratio"), py::arg("lambda_") = 1.4, "Returns (delta, C).");
    m.def("delta_oracle", &delta_oracle, py::arg("config"), py::arg("ratio"), py::arg("lambda_") = 1.4);
    m.def("build_schedule", &build_schedule, py::arg("config"), py::arg("ratio"), py::arg("lambda_") = 1.4);

    m.def(
        "overall_ratio",
        [](double rv, double ra, std::vector<std::int64_t> n_v, std::vector<std::int64_t> n_a) {
            return overall_ratio(rv, ra, layout_of(std::move(n_v), std::move(n_a)));
        },
        py::arg("ratio_v"), py::arg("ratio_a"), py::arg("n_v"), py::arg("n_a"));
    m.def(
        "audio_intact_ratio_v",
        [](double r, std::vector<std::int64_t> n_v, std::vector<std::int64_t> n_a, double floor) {
            return audio_intact_ratio_v(r, layout_of(std::move(n_v), std::move(n_a)), floor);
        },
        py::arg("ratio"), py::arg("n_v"), py::arg("n_a"), py::arg("min_practical") = 0.0);

    m.def(
        "greedy_maxmin",
        [](const py::array_t<float, py::array::c_style | py::array::forcecast>& z, std::vector<double> w,
           std::size_t k) { return greedy_maxmin(to_matrix(z), w, k).picks; },
        py::arg("embeddings"), py::arg("weights"), py::arg("k"), "Picks in selection order.");
    m.def(
        "mean_received_attention",
        [](const py::array_t<float, py::array::c_style | py::array::forcecast>& a) {
            return mean_received_attention(to_matrix(a));
        },
        py::arg("attn"));
    m.def(
        "window_relevance",
        [](std::vector<double> sv, std::vector<double> sa, std::vector<std::int64_t> n_v, std::vector<std::int64_t> n_a,
           double tau) { return window_relevance(sv, sa, layout_of(std::move(n_v), std::move(n_a)), tau); },
        py::arg("scores_v"), py::arg("scores_a"), py::arg("n_v"), py::arg("n_a"), py::arg("tau") = 0.1);
    m.def(
        "allocate",
        [](std::vector<double> s_v, std::vector<double> s_a, double r_v, double r_a, std::vector<std::int64_t> n_v,
           std::vector<std::int64_t> n_a) {
            const auto layout = layout_of(std::move(n_v), std::move(n_a));
            RelevanceScores rel;
            rel.s = combine_window_weights(s_v, s_a, layout);
            rel.s_v = std::move(s_v);
            rel.s_a = std::move(s_a);
            return allocate(rel, r_v, r_a, layout);
        },
        py::arg("s_v"), py::arg("s_a"), py::arg("r_v"), py::arg("r_a"), py::arg("n_v"), py::arg("n_a"));
    m.def(
        "select_topk", [](std::vector<double> s, std::size_t k) { return select_topk(s, k); }, py::arg("scores"),
        py::arg("budget"));
    m.def("layer_flops", &layer_flops, py::arg("n"), py::arg("config"));

    m.def(
        "run_synthetic",
        [](const SynthSpec& synth, const ModelConfig& config, const RetentionSpec& spec, unsigned threads) {
            PipelineResult r;
            {
                py::gil_scoped_release release;
                r = run_pipeline(synth, config, spec, threads);
            }
            return trace_dict(r.trace);
        },
        py::arg("synth"), py::arg("config"), py::arg("spec"), py::arg("threads") = 1,
        "Runs all three stages on a generated stream; returns the trace as a dict.");

    m.def(
        "ots_roundtrip",
        [](const SynthSpec& synth) {
            const auto g = synth_generate(synth);
            OtsContainer c;
            c.stream = g.stream;
            c.windows = synth.windows;
            const auto bytes = encode_ots(c);
            return py::make_tuple(py::bytes(reinterpret_cast<const char*>(bytes.data()), bytes.size()),
                                  decode_ots(bytes) == c);
        },
        py::arg("synth"), "Encodes a generated stream; returns (bytes, decoded == original).");
    m.def(
        "decode_ots_header",
        [](py::bytes data) {
            const std::string s = data;
            const auto c = decode_ots(std::vector<std::uint8_t>(s.begin(), s.end()));
            return py::make_tuple(c.stream.size(), c.stream.dim(), c.windows);
        },
        py::arg("data"), "Returns (N, d, T) of a container.");

    m.attr("FLOPS_MODEL") = kFlopsModel;
}
