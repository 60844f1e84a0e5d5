#pragma once

// Flat `section.key=value` run configuration. Every key is optional; a key
// that is not listed below is an error.
//
//   schedule.kind=cosine             cosine | stepwise | constant
//   schedule.initial_tokens=16
//   schedule.num_layers=28
//   schedule.stages=                 stepwise only, "0:16,15:1"; empty means
//   schedule.stage_count=4           match the cosine average with this many stages
//   plan.strategy=suffix             suffix | uniform
//   segment.window_frames=64
//   segment.stride_frames=32
//   segment.clip_size=8
//   segment.scoring_layers=          comma list, empty means all layers
//   segment.global=false
//   chunk.chunk_frames=512
//   chunk.n_repeat=2
//   chunk.n_selected_frames=512
//   dims.num_layers=28 dims.model_width=1536 dims.num_attention_heads=12
//   dims.num_kv_heads=2 dims.head_width=128 dims.mlp_width=8960
//   cost.unit=macs cost.placement=before_layer cost.causal_half=false
//   cost.frames=1024,2048,4096 cost.query_tokens=863
//   bench.seed=7 bench.seeds=100 bench.needle_signal=4.8 bench.end_bias=4
//   bench.begin_bias=0 bench.decay_frames=48 bench.noise_scale=0.5
//   bench.total_frames=256 bench.needle_frame=128
//   bench.end_bias_sweep=0,0.5,...,8
//   niah.total_frames=2048 niah.hops=3 niah.signals=0,1,3
//   niah.n_repeat=8 niah.n_selected_frames=1
//   output.dir=.

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "vtc/bench.hpp"
#include "vtc/cost_model.hpp"
#include "vtc/lp_comp.hpp"
#include "vtc/qc_comp.hpp"

namespace vtc {

/// Environment variable naming the default config file.
inline constexpr const char* kConfigEnv = "VTC_CONFIG";

struct RunConfig {
  ScheduleKind schedule_kind = ScheduleKind::kCosine;
  std::size_t initial_tokens = 16;
  std::size_t num_layers = 28;
  std::vector<Stage> stages;
  std::size_t stage_count = kDefaultStepwiseStages;
  DropStrategy strategy = DropStrategy::kSuffix;

  SegmentConfig segment;
  bool global_scoring = false;
  ChunkConfig chunk;

  ModelDims dims;
  CostConvention cost = CostConvention::reported();
  std::vector<std::size_t> cost_frames = {1024, 2048, 4096};
  std::size_t query_tokens = 863;

  BiasOracleConfig bias = biased_fixture();
  std::size_t seeds = 100;
  std::vector<double> end_bias_sweep;

  std::size_t niah_frames = 2048;
  std::size_t niah_hops = 3;
  std::vector<double> niah_signals = {0.0, 1.0, 3.0};
  ChunkConfig niah_chunk{512, 8, 1};

  std::filesystem::path output_dir = ".";

  RunConfig();

  /// Throws ValidationError on unknown keys or malformed values.
  static RunConfig from_text(std::string_view text);
  static RunConfig load(const std::filesystem::path& path);
  /// Every key with its current value.
  std::string to_text() const;

  CompressionSchedule schedule() const;
  DropPlan plan() const { return build_plan(schedule(), strategy); }
  ScoringPlan scoring_plan(std::size_t threads = 0) const;
  NiahSettings niah_settings() const;

  static const std::vector<std::string>& known_keys();
};

}  // namespace vtc
