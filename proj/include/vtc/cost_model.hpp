#pragma once

// Analytic prefill FLOPs of the LLM layers (vision encoder excluded).

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include "vtc/schedule.hpp"

namespace vtc {

struct ModelDims {
  std::size_t num_layers = 28;
  std::size_t model_width = 1536;
  std::size_t num_attention_heads = 12;
  std::size_t num_kv_heads = 2;
  std::size_t head_width = 128;
  std::size_t mlp_width = 8960;

  /// Public configuration of Qwen2-1.5B (the defaults above).
  static ModelDims qwen2_1_5b() { return {}; }

  void validate() const;
  /// q, k, v, o projections plus the gated MLP's three matrices.
  std::size_t linear_params() const;
  bool operator==(const ModelDims&) const = default;
};

enum class FlopUnit {
  kFlops,  // one multiply-accumulate counts as 2
  kMacs,   // one multiply-accumulate counts as 1
};

/// Which count a layer processes when its per-frame count changes.
enum class DropPlacement {
  kAfterLayer,   // layer i (1-based) sees tokens_at(i - 1)
  kBeforeLayer,  // layer i sees tokens_at(i)
};

std::string_view to_string(FlopUnit unit);
std::string_view to_string(DropPlacement placement);
FlopUnit parse_flop_unit(std::string_view text);
DropPlacement parse_drop_placement(std::string_view text);

struct CostConvention {
  FlopUnit unit = FlopUnit::kFlops;
  DropPlacement placement = DropPlacement::kAfterLayer;
  /// Halve the S^2 attention term for the causal mask.
  bool causal_half = false;

  /// The convention whose absolute totals line up with published prefill figures.
  static CostConvention reported() { return {FlopUnit::kMacs, DropPlacement::kBeforeLayer, false}; }
  bool operator==(const CostConvention&) const = default;
};

/// 2*S*P_lin + 4*S^2*(H*d_h) under the default convention.
double layer_flops(std::size_t seq_len, const ModelDims& dims, const CostConvention& convention = {});

/// Video tokens per frame seen by 0-based layer `layer`.
std::size_t tokens_seen_by_layer(const CompressionSchedule& schedule, std::size_t layer, DropPlacement placement);

struct CostScenario {
  std::size_t frames = 0;
  std::size_t query_tokens = 0;
  double baseline_flops = 0.0;
  double compressed_flops = 0.0;

  double reduction() const { return 1.0 - compressed_flops / baseline_flops; }
};

struct CostReport {
  CostConvention convention;
  ModelDims dims;
  std::vector<CostScenario> scenarios;

  std::string to_csv() const;
  /// Human-readable table with the counting convention in a footer.
  std::string to_table() const;
};

/// Baseline keeps tokens_at(0) for every layer. The schedule must span dims.num_layers.
CostScenario prefill_cost(std::size_t frames, std::size_t query_tokens, const CompressionSchedule& schedule,
                          const ModelDims& dims, const CostConvention& convention = {});

CostReport prefill_report(const std::vector<std::size_t>& frames, std::size_t query_tokens,
                          const CompressionSchedule& schedule, const ModelDims& dims,
                          const CostConvention& convention = {});

}  // namespace vtc
