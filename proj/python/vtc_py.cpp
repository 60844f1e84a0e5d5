#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "vtc/bench.hpp"
#include "vtc/cost_model.hpp"
#include "vtc/dumps.hpp"
#include "vtc/lp_comp.hpp"
#include "vtc/qc_comp.hpp"
#include "vtc/reports.hpp"
#include "vtc/schedule.hpp"

namespace py = pybind11;
using namespace vtc;

namespace {

using F32Array = py::array_t<float, py::array::c_style | py::array::forcecast>;
using F64Array = py::array_t<double, py::array::c_style | py::array::forcecast>;

TokenTensor<float> tensor_from(const F32Array& a) {
  if (a.ndim() != 3) throw py::value_error("tokens must have shape (frames, slots, width)");
  const auto f = static_cast<std::size_t>(a.shape(0)), s = static_cast<std::size_t>(a.shape(1)),
             w = static_cast<std::size_t>(a.shape(2));
  return TokenTensor<float>(f, s, w, std::vector<float>(a.data(), a.data() + a.size()));
}

F32Array array_from(const TokenTensor<float>& t) {
  F32Array out({t.frames(), t.slots(), t.width()});
  std::copy(t.data().begin(), t.data().end(), out.mutable_data());
  return out;
}

py::array_t<double> vec_array(const std::vector<double>& v) {
  return py::array_t<double>(static_cast<py::ssize_t>(v.size()), v.data());
}

// One (heads, question_tokens, frames * tokens_per_frame) array per layer.
AttentionBlock block_from(std::size_t frames, const std::vector<F64Array>& layers) {
  if (layers.empty()) throw py::value_error("at least one layer is required");
  if (frames == 0) throw py::value_error("frames must be positive");
  std::vector<std::size_t> tpf;
  for (const auto& a : layers) {
    if (a.ndim() != 3) throw py::value_error("each layer must have shape (heads, question_tokens, columns)");
    if (a.shape(0) != layers[0].shape(0) || a.shape(1) != layers[0].shape(1))
      throw py::value_error("layers disagree on heads or question tokens");
    if (a.shape(2) % static_cast<py::ssize_t>(frames) != 0 || a.shape(2) == 0)
      throw py::value_error("columns must be a positive multiple of frames");
    tpf.push_back(static_cast<std::size_t>(a.shape(2)) / frames);
  }
  AttentionBlock b(layers.size(), static_cast<std::size_t>(layers[0].shape(0)), frames,
                   static_cast<std::size_t>(layers[0].shape(1)), tpf);
  for (std::size_t l = 0; l < layers.size(); ++l)
    std::copy(layers[l].data(), layers[l].data() + layers[l].size(), b.layer_data(l).begin());
  return b;
}

py::dict table_dict(const FrameScoreTable& t) {
  py::dict d;
  d["score"] = vec_array(t.score);
  d["coverage"] = t.coverage;
  return d;
}

ScoringPlan make_plan(bool global, std::size_t window, std::size_t stride, std::size_t clip, std::size_t chunk,
                      std::size_t n_repeat, std::vector<std::size_t> layers, std::size_t threads) {
  ScoringPlan p;
  p.global = global;
  p.segment.window_frames = window;
  p.segment.stride_frames = stride;
  p.segment.clip_size = clip;
  p.segment.scoring_layers = std::move(layers);
  p.chunk.chunk_frames = chunk;
  p.chunk.n_repeat = n_repeat;
  p.threads = threads;
  return p;
}

#define VTC_PLAN_ARGS                                                                                           \
  py::arg("global_") = false, py::arg("window") = 64, py::arg("stride") = 32, py::arg("clip") = 8,              \
      py::arg("chunk") = 512, py::arg("n_repeat") = 2, py::arg("scoring_layers") = std::vector<std::size_t>{}, \
      py::arg("threads") = 0

}  // namespace

PYBIND11_MODULE(vtc, m) {
  m.doc() = "Layer-wise token compression schedules, question-conditioned frame scoring and prefill cost accounting";

  auto base = py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
  py::register_exception<PreconditionError>(m, "PreconditionError", base.ptr());
  py::register_exception<ValidationError>(m, "ValidationError", base.ptr());
  py::register_exception<NumericError>(m, "NumericError", base.ptr());
  py::register_exception<ScheduleConstructionError>(m, "ScheduleConstructionError", base.ptr());

  py::class_<CompressionSchedule>(m, "Schedule")
      .def_static("cosine", &CompressionSchedule::cosine, py::arg("initial_tokens") = 16, py::arg("num_layers") = 28)
      .def_static("constant", &CompressionSchedule::constant, py::arg("initial_tokens") = 16,
                  py::arg("num_layers") = 28)
      .def_static(
          "stepwise",
          [](std::size_t n1, std::size_t layers, const std::vector<std::pair<std::size_t, std::size_t>>& stages) {
            std::vector<Stage> st;
            for (auto [layer, tokens] : stages) st.push_back({layer, tokens});
            return CompressionSchedule::stepwise(n1, layers, std::move(st));
          },
          py::arg("initial_tokens"), py::arg("num_layers"), py::arg("stages"))
      .def_static("from_text", &CompressionSchedule::from_text)
      .def_property_readonly("kind", [](const CompressionSchedule& s) { return std::string(to_string(s.kind())); })
      .def_property_readonly("initial_tokens", &CompressionSchedule::initial_tokens)
      .def_property_readonly("num_layers", &CompressionSchedule::num_layers)
      .def_property_readonly("counts", &CompressionSchedule::counts)
      .def("tokens_at", &CompressionSchedule::tokens_at)
      .def("average_tokens_processed", &CompressionSchedule::average_tokens_processed)
      .def("to_text", &CompressionSchedule::to_text)
      .def("__eq__", [](const CompressionSchedule& a, const CompressionSchedule& b) { return a == b; });

  m.def("build_stepwise_matching", &build_stepwise_matching, py::arg("initial_tokens"), py::arg("num_layers"),
        py::arg("num_stages"), py::arg("target_average"));

  py::class_<Transition>(m, "Transition")
      .def_readonly("layer", &Transition::layer)
      .def_readonly("n_prev", &Transition::n_prev)
      .def_readonly("n_next", &Transition::n_next)
      .def_readonly("kept", &Transition::kept)
      .def("dropped", &Transition::dropped);

  py::class_<DropPlan>(m, "DropPlan")
      .def(py::init([](const CompressionSchedule& s, const std::string& strategy) {
             return DropPlan(s, parse_drop_strategy(strategy));
           }),
           py::arg("schedule"), py::arg("strategy") = "suffix")
      .def_static("from_text", &DropPlan::from_text)
      .def_property_readonly("schedule", &DropPlan::schedule)
      .def_property_readonly("strategy", [](const DropPlan& p) { return std::string(to_string(p.strategy())); })
      .def_property_readonly("transitions", &DropPlan::transitions)
      .def("surviving_slots", &DropPlan::surviving_slots)
      .def("to_text", &DropPlan::to_text);

  m.def(
      "apply_plan", [](const F32Array& tokens, const DropPlan& plan) { return array_from(apply_plan(tensor_from(tokens), plan)); },
      py::arg("tokens"), py::arg("plan"), "Compress a (frames, slots, width) array through every transition.");

  m.def(
      "read_token_dump", [](const std::filesystem::path& p) { return array_from(read_token_dump(p)); },
      py::arg("path"));
  m.def(
      "write_token_dump",
      [](const std::filesystem::path& p, const F32Array& tokens) { write_token_dump(p, tensor_from(tokens)); },
      py::arg("path"), py::arg("tokens"));

  py::class_<AttentionBlock>(m, "AttentionBlock")
      .def(py::init(&block_from), py::arg("frames"), py::arg("layers"))
      .def_property_readonly("layers", &AttentionBlock::layers)
      .def_property_readonly("heads", &AttentionBlock::heads)
      .def_property_readonly("frames", &AttentionBlock::frames)
      .def_property_readonly("question_tokens", &AttentionBlock::question_tokens)
      .def_property_readonly("tokens_per_frame", &AttentionBlock::tokens_per_frame)
      .def("layer",
           [](const AttentionBlock& b, std::size_t l) {
             if (l >= b.layers()) throw py::index_error("layer out of range");
             py::array_t<double> out({b.heads(), b.question_tokens(), b.video_columns(l)});
             std::copy(b.layer_data(l).begin(), b.layer_data(l).end(), out.mutable_data());
             return out;
           })
      .def("validate", &AttentionBlock::validate, py::arg("tolerance") = 1e-4);

  m.def("read_attention_dump", &read_attention_dump, py::arg("path"));
  m.def("write_attention_dump", &write_attention_dump, py::arg("path"), py::arg("block"));

  m.def(
      "segment_windows",
      [](std::size_t total, std::size_t window, std::size_t stride) {
        SegmentConfig c;
        c.window_frames = window;
        c.stride_frames = stride;
        std::vector<std::pair<std::size_t, std::size_t>> out;
        for (const auto& w : segment_windows(total, c)) out.emplace_back(w.start, w.length);
        return out;
      },
      py::arg("total_frames"), py::arg("window") = 64, py::arg("stride") = 32);
  m.def(
      "chunk_plan",
      [](std::size_t total, std::size_t chunk, std::size_t n_repeat) {
        ChunkConfig c;
        c.chunk_frames = chunk;
        c.n_repeat = n_repeat;
        std::vector<std::pair<std::size_t, std::size_t>> out;
        for (const auto& w : chunk_plan(total, c)) out.emplace_back(w.start, w.length);
        return out;
      },
      py::arg("total_frames"), py::arg("chunk") = 512, py::arg("n_repeat") = 2);

  m.def(
      "score_windows",
      [](const std::vector<std::tuple<std::size_t, std::size_t, AttentionBlock>>& windows, bool global,
         std::size_t window, std::size_t stride, std::size_t clip, std::size_t chunk, std::size_t n_repeat,
         std::vector<std::size_t> layers, std::size_t threads) {
        WindowMapSource src;
        for (const auto& [start, length, block] : windows) src.add({start, length}, block);
        return table_dict(score_video(src, make_plan(global, window, stride, clip, chunk, n_repeat, layers, threads)));
      },
      py::arg("windows"), VTC_PLAN_ARGS,
      "Score (start, length, block) windows; every window the plan visits must be present.");
  m.def(
      "global_score",
      [](const AttentionBlock& block, std::size_t clip, std::vector<std::size_t> layers) {
        SegmentConfig c;
        c.clip_size = clip;
        c.scoring_layers = std::move(layers);
        return table_dict(global_score(block, c));
      },
      py::arg("block"), py::arg("clip") = 8, py::arg("scoring_layers") = std::vector<std::size_t>{});
  m.def(
      "score_index",
      [](const std::filesystem::path& index, bool global, std::size_t window, std::size_t stride, std::size_t clip,
         std::size_t chunk, std::size_t n_repeat, std::vector<std::size_t> layers, std::size_t threads) {
        const DumpIndexSource src(DumpIndex::load(index));
        return table_dict(score_video(src, make_plan(global, window, stride, clip, chunk, n_repeat, layers, threads)));
      },
      py::arg("index"), VTC_PLAN_ARGS, "Score the per-window dumps listed in an index file.");
  m.def(
      "select_top_k",
      [](const std::vector<double>& score, std::size_t k, bool clips, std::size_t clip_size) {
        FrameScoreTable t;
        t.score = score;
        t.coverage.assign(score.size(), 1);
        return select_top_k(t, k, clips, clip_size).frames;
      },
      py::arg("score"), py::arg("k"), py::arg("clip_granularity") = false, py::arg("clip_size") = 8);

  py::class_<ModelDims>(m, "ModelDims")
      .def(py::init<>())
      .def_readwrite("num_layers", &ModelDims::num_layers)
      .def_readwrite("model_width", &ModelDims::model_width)
      .def_readwrite("num_attention_heads", &ModelDims::num_attention_heads)
      .def_readwrite("num_kv_heads", &ModelDims::num_kv_heads)
      .def_readwrite("head_width", &ModelDims::head_width)
      .def_readwrite("mlp_width", &ModelDims::mlp_width)
      .def("linear_params", &ModelDims::linear_params);

  m.def(
      "prefill_cost",
      [](const std::vector<std::size_t>& frames, std::size_t query_tokens, const CompressionSchedule& schedule,
         const ModelDims& dims, const std::string& unit, const std::string& placement, bool causal_half) {
        const CostConvention conv{parse_flop_unit(unit), parse_drop_placement(placement), causal_half};
        const auto r = prefill_report(frames, query_tokens, schedule, dims, conv);
        py::list rows;
        for (const auto& s : r.scenarios) {
          py::dict d;
          d["frames"] = s.frames;
          d["query_tokens"] = s.query_tokens;
          d["baseline_flops"] = s.baseline_flops;
          d["compressed_flops"] = s.compressed_flops;
          d["reduction"] = s.reduction();
          rows.append(d);
        }
        return rows;
      },
      py::arg("frames") = std::vector<std::size_t>{1024, 2048, 4096}, py::arg("query_tokens") = 863,
      py::arg("schedule") = CompressionSchedule::cosine(16, 28), py::arg("dims") = ModelDims{},
      py::arg("unit") = "macs", py::arg("placement") = "before_layer", py::arg("causal_half") = false);

  m.def(
      "bias_experiment",
      [](const std::string& fixture, std::optional<double> end_bias, std::uint64_t seed) {
        BiasOracleConfig c;
        if (fixture == "biased") {
          c = biased_fixture();
        } else if (fixture == "unbiased") {
          c = unbiased_fixture();
        } else {
          throw py::value_error("fixture must be 'biased' or 'unbiased'");
        }
        if (end_bias) c.end_bias = *end_bias;
        c.seed = seed;
        const auto r = bias_experiment(c, fixture_segment_config());
        py::dict d;
        d["needle_frame"] = c.needle_frame;
        d["global_rank"] = r.global_rank;
        d["segmented_rank"] = r.segmented_rank;
        d["global"] = table_dict(r.global);
        d["segmented"] = table_dict(r.segmented);
        return d;
      },
      py::arg("fixture") = "biased", py::arg("end_bias") = py::none(), py::arg("seed") = biased_fixture().seed);

  m.def(
      "niah_recovery",
      [](std::size_t frames, std::size_t hops, double signal, std::uint64_t first_seed, std::size_t seeds,
         std::size_t threads) {
        NiahSettings st;
        st.threads = threads;
        return niah_recovery(frames, hops, signal, first_seed, seeds, st).rate();
      },
      py::arg("frames") = 2048, py::arg("hops") = 3, py::arg("signal") = 3.0, py::arg("first_seed") = 0,
      py::arg("seeds") = 100, py::arg("threads") = 0, py::call_guard<py::gil_scoped_release>());
}
