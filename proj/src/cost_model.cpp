#include "vtc/cost_model.hpp"

#include <fmt/format.h>

#include "vtc/errors.hpp"

namespace vtc {

void ModelDims::validate() const {
  require(num_layers >= 1 && model_width >= 1 && num_attention_heads >= 1 && num_kv_heads >= 1 &&
              head_width >= 1 && mlp_width >= 1,
          "ModelDims: every dimension must be >= 1");
}

std::size_t ModelDims::linear_params() const {
  const std::size_t q = model_width * num_attention_heads * head_width;
  const std::size_t kv = 2 * model_width * num_kv_heads * head_width;
  const std::size_t o = num_attention_heads * head_width * model_width;
  const std::size_t mlp = 3 * model_width * mlp_width;
  return q + kv + o + mlp;
}

std::string_view to_string(FlopUnit unit) { return unit == FlopUnit::kFlops ? "flops" : "macs"; }

std::string_view to_string(DropPlacement placement) {
  return placement == DropPlacement::kAfterLayer ? "after_layer" : "before_layer";
}

FlopUnit parse_flop_unit(std::string_view text) {
  if (text == "flops") return FlopUnit::kFlops;
  if (text == "macs") return FlopUnit::kMacs;
  throw ValidationError("unknown FLOP unit '" + std::string(text) + "' (expected flops or macs)");
}

DropPlacement parse_drop_placement(std::string_view text) {
  if (text == "after_layer") return DropPlacement::kAfterLayer;
  if (text == "before_layer") return DropPlacement::kBeforeLayer;
  throw ValidationError("unknown drop placement '" + std::string(text) + "' (expected after_layer or before_layer)");
}

double layer_flops(std::size_t seq_len, const ModelDims& dims, const CostConvention& convention) {
  require(seq_len >= 1, "layer_flops: sequence length must be >= 1");
  dims.validate();
  const double s = static_cast<double>(seq_len);
  const double per_mac = convention.unit == FlopUnit::kFlops ? 2.0 : 1.0;
  const double linear = s * static_cast<double>(dims.linear_params());
  // Q K^T and A V, each S^2 * H * d_h multiply-accumulates
  double quadratic = 2.0 * s * s * static_cast<double>(dims.num_attention_heads * dims.head_width);
  if (convention.causal_half) quadratic *= 0.5;
  return per_mac * (linear + quadratic);
}

std::size_t tokens_seen_by_layer(const CompressionSchedule& schedule, std::size_t layer, DropPlacement placement) {
  require(layer < schedule.num_layers(), "tokens_seen_by_layer: layer out of range");
  return schedule.tokens_at(placement == DropPlacement::kAfterLayer ? layer : layer + 1);
}

CostScenario prefill_cost(std::size_t frames, std::size_t query_tokens, const CompressionSchedule& schedule,
                          const ModelDims& dims, const CostConvention& convention) {
  require(frames >= 1, "prefill_cost: frames must be >= 1");
  require(schedule.num_layers() == dims.num_layers,
          "prefill_cost: schedule has " + std::to_string(schedule.num_layers()) + " layers, model has " +
              std::to_string(dims.num_layers));
  CostScenario s;
  s.frames = frames;
  s.query_tokens = query_tokens;
  const std::size_t base_len = frames * schedule.initial_tokens() + query_tokens;
  for (std::size_t l = 0; l < dims.num_layers; ++l) {
    s.baseline_flops += layer_flops(base_len, dims, convention);
    const std::size_t n = tokens_seen_by_layer(schedule, l, convention.placement);
    s.compressed_flops += layer_flops(frames * n + query_tokens, dims, convention);
  }
  return s;
}

CostReport prefill_report(const std::vector<std::size_t>& frames, std::size_t query_tokens,
                          const CompressionSchedule& schedule, const ModelDims& dims,
                          const CostConvention& convention) {
  CostReport r;
  r.convention = convention;
  r.dims = dims;
  for (auto t : frames) r.scenarios.push_back(prefill_cost(t, query_tokens, schedule, dims, convention));
  return r;
}

std::string CostReport::to_csv() const {
  std::string out = "frames,query_tokens,baseline_tflops,compressed_tflops,reduction_pct\n";
  for (const auto& s : scenarios) {
    out += fmt::format("{},{},{:.3f},{:.3f},{:.2f}\n", s.frames, s.query_tokens, s.baseline_flops / 1e12,
                       s.compressed_flops / 1e12, 100.0 * s.reduction());
  }
  return out;
}

std::string CostReport::to_table() const {
  std::string out = fmt::format("dims: layers={} width={} heads={} kv_heads={} head_width={} mlp_width={} "
                                "linear_params={}\n",
                                dims.num_layers, dims.model_width, dims.num_attention_heads, dims.num_kv_heads,
                                dims.head_width, dims.mlp_width, dims.linear_params());
  out += fmt::format("{:>8} {:>8} {:>16} {:>18} {:>10}\n", "frames", "query", "baseline TFLOPs",
                                "compressed TFLOPs", "reduction");
  for (const auto& s : scenarios) {
    out += fmt::format("{:>8} {:>8} {:>16.1f} {:>18.1f} {:>9.1f}%\n", s.frames, s.query_tokens,
                       s.baseline_flops / 1e12, s.compressed_flops / 1e12, 100.0 * s.reduction());
  }
  out += fmt::format("unit={} placement={} causal_half={}; LLM layers only, encoder and decode excluded, "
                     "latency not modeled\n",
                     to_string(convention.unit), to_string(convention.placement), convention.causal_half);
  return out;
}

}  // namespace vtc
