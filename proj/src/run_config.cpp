#include "vtc/run_config.hpp"

#include <fmt/format.h>

#include <sstream>

#include "vtc/dumps.hpp"
#include "vtc/kv_text.hpp"

namespace vtc {

namespace {

bool parse_bool(const std::string& text, const std::string& key) {
  if (text == "true" || text == "1") return true;
  if (text == "false" || text == "0") return false;
  throw ValidationError(key + ": expected true or false, got '" + text + "'");
}

std::vector<double> parse_double_list(const std::string& text, const std::string& key) {
  std::vector<double> out;
  if (text.empty()) return out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(parse_double(item, key));
  return out;
}

std::string join_doubles(const std::vector<double>& v) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) out += (i ? "," : "") + fmt::format("{}", v[i]);
  return out;
}

std::vector<Stage> parse_stage_list(const std::string& text) {
  std::vector<Stage> out;
  if (text.empty()) return out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const auto colon = item.find(':');
    if (colon == std::string::npos) throw ValidationError("schedule.stages: expected layer:tokens, got '" + item + "'");
    out.push_back({parse_size(item.substr(0, colon), "schedule.stages layer"),
                   parse_size(item.substr(colon + 1), "schedule.stages tokens")});
  }
  return out;
}

std::string join_stages(const std::vector<Stage>& stages) {
  std::string out;
  for (std::size_t i = 0; i < stages.size(); ++i) {
    out += fmt::format("{}{}:{}", i ? "," : "", stages[i].start_layer, stages[i].tokens);
  }
  return out;
}

}  // namespace

RunConfig::RunConfig() {
  for (int i = 0; i <= 16; ++i) end_bias_sweep.push_back(0.5 * i);
}

const std::vector<std::string>& RunConfig::known_keys() {
  static const std::vector<std::string> keys = {
      "schedule.kind", "schedule.initial_tokens", "schedule.num_layers", "schedule.stages", "schedule.stage_count",
      "plan.strategy", "segment.window_frames", "segment.stride_frames", "segment.clip_size",
      "segment.scoring_layers", "segment.global", "chunk.chunk_frames", "chunk.n_repeat", "chunk.n_selected_frames",
      "dims.num_layers", "dims.model_width", "dims.num_attention_heads", "dims.num_kv_heads", "dims.head_width",
      "dims.mlp_width", "cost.unit", "cost.placement", "cost.causal_half", "cost.frames", "cost.query_tokens",
      "bench.seed", "bench.seeds", "bench.total_frames", "bench.needle_frame", "bench.needle_signal",
      "bench.begin_bias", "bench.end_bias", "bench.decay_frames", "bench.noise_scale", "bench.end_bias_sweep",
      "niah.total_frames", "niah.hops", "niah.signals", "niah.n_repeat", "niah.n_selected_frames", "output.dir"};
  return keys;
}

RunConfig RunConfig::from_text(std::string_view text) {
  const auto kv = KeyValueText::parse(text);
  kv.reject_unknown(known_keys());
  RunConfig c;
  auto size = [&](const char* key, std::size_t& field) { field = kv.get_size_or(key, field); };
  auto real = [&](const char* key, double& field) { field = kv.get_double_or(key, field); };
  auto flag = [&](const char* key, bool& field) {
    if (kv.has(key)) field = parse_bool(kv.get(key), key);
  };

  if (kv.has("schedule.kind")) c.schedule_kind = parse_schedule_kind(kv.get("schedule.kind"));
  size("schedule.initial_tokens", c.initial_tokens);
  size("schedule.num_layers", c.num_layers);
  if (kv.has("schedule.stages")) c.stages = parse_stage_list(kv.get("schedule.stages"));
  size("schedule.stage_count", c.stage_count);
  if (kv.has("plan.strategy")) c.strategy = parse_drop_strategy(kv.get("plan.strategy"));

  size("segment.window_frames", c.segment.window_frames);
  size("segment.stride_frames", c.segment.stride_frames);
  size("segment.clip_size", c.segment.clip_size);
  if (kv.has("segment.scoring_layers")) c.segment.scoring_layers = parse_size_list(kv.get("segment.scoring_layers"), "segment.scoring_layers");
  flag("segment.global", c.global_scoring);
  size("chunk.chunk_frames", c.chunk.chunk_frames);
  size("chunk.n_repeat", c.chunk.n_repeat);
  size("chunk.n_selected_frames", c.chunk.n_selected_frames);

  size("dims.num_layers", c.dims.num_layers);
  size("dims.model_width", c.dims.model_width);
  size("dims.num_attention_heads", c.dims.num_attention_heads);
  size("dims.num_kv_heads", c.dims.num_kv_heads);
  size("dims.head_width", c.dims.head_width);
  size("dims.mlp_width", c.dims.mlp_width);
  if (kv.has("cost.unit")) c.cost.unit = parse_flop_unit(kv.get("cost.unit"));
  if (kv.has("cost.placement")) c.cost.placement = parse_drop_placement(kv.get("cost.placement"));
  flag("cost.causal_half", c.cost.causal_half);
  if (kv.has("cost.frames")) c.cost_frames = parse_size_list(kv.get("cost.frames"), "cost.frames");
  size("cost.query_tokens", c.query_tokens);

  std::size_t seed = c.bias.seed;
  size("bench.seed", seed);
  c.bias.seed = seed;
  size("bench.seeds", c.seeds);
  size("bench.total_frames", c.bias.total_frames);
  size("bench.needle_frame", c.bias.needle_frame);
  real("bench.needle_signal", c.bias.needle_signal);
  real("bench.begin_bias", c.bias.begin_bias);
  real("bench.end_bias", c.bias.end_bias);
  real("bench.decay_frames", c.bias.decay_frames);
  real("bench.noise_scale", c.bias.noise_scale);
  if (kv.has("bench.end_bias_sweep")) c.end_bias_sweep = parse_double_list(kv.get("bench.end_bias_sweep"), "bench.end_bias_sweep");

  size("niah.total_frames", c.niah_frames);
  size("niah.hops", c.niah_hops);
  if (kv.has("niah.signals")) c.niah_signals = parse_double_list(kv.get("niah.signals"), "niah.signals");
  size("niah.n_repeat", c.niah_chunk.n_repeat);
  size("niah.n_selected_frames", c.niah_chunk.n_selected_frames);
  if (kv.has("output.dir")) c.output_dir = kv.get("output.dir");

  try {
    c.segment.validate();
    c.chunk.validate();
    c.niah_chunk.validate();
    c.dims.validate();
    c.bias.validate();
    (void)c.schedule();
  } catch (const PreconditionError& e) {
    throw ValidationError(std::string("config: ") + e.what());
  }
  return c;
}

RunConfig RunConfig::load(const std::filesystem::path& path) {
  try {
    return from_text(read_file_text(path));
  } catch (const ValidationError& e) {
    throw ValidationError(path.string() + ": " + e.what());
  }
}

std::string RunConfig::to_text() const {
  KeyValueText kv;
  kv.set("schedule.kind", std::string(to_string(schedule_kind)));
  kv.set("schedule.initial_tokens", std::to_string(initial_tokens));
  kv.set("schedule.num_layers", std::to_string(num_layers));
  kv.set("schedule.stages", join_stages(stages));
  kv.set("schedule.stage_count", std::to_string(stage_count));
  kv.set("plan.strategy", std::string(to_string(strategy)));
  kv.set("segment.window_frames", std::to_string(segment.window_frames));
  kv.set("segment.stride_frames", std::to_string(segment.stride_frames));
  kv.set("segment.clip_size", std::to_string(segment.clip_size));
  kv.set("segment.scoring_layers", join_sizes(segment.scoring_layers));
  kv.set("segment.global", global_scoring ? "true" : "false");
  kv.set("chunk.chunk_frames", std::to_string(chunk.chunk_frames));
  kv.set("chunk.n_repeat", std::to_string(chunk.n_repeat));
  kv.set("chunk.n_selected_frames", std::to_string(chunk.n_selected_frames));
  kv.set("dims.num_layers", std::to_string(dims.num_layers));
  kv.set("dims.model_width", std::to_string(dims.model_width));
  kv.set("dims.num_attention_heads", std::to_string(dims.num_attention_heads));
  kv.set("dims.num_kv_heads", std::to_string(dims.num_kv_heads));
  kv.set("dims.head_width", std::to_string(dims.head_width));
  kv.set("dims.mlp_width", std::to_string(dims.mlp_width));
  kv.set("cost.unit", std::string(to_string(cost.unit)));
  kv.set("cost.placement", std::string(to_string(cost.placement)));
  kv.set("cost.causal_half", cost.causal_half ? "true" : "false");
  kv.set("cost.frames", join_sizes(cost_frames));
  kv.set("cost.query_tokens", std::to_string(query_tokens));
  kv.set("bench.seed", std::to_string(bias.seed));
  kv.set("bench.seeds", std::to_string(seeds));
  kv.set("bench.total_frames", std::to_string(bias.total_frames));
  kv.set("bench.needle_frame", std::to_string(bias.needle_frame));
  kv.set("bench.needle_signal", fmt::format("{}", bias.needle_signal));
  kv.set("bench.begin_bias", fmt::format("{}", bias.begin_bias));
  kv.set("bench.end_bias", fmt::format("{}", bias.end_bias));
  kv.set("bench.decay_frames", fmt::format("{}", bias.decay_frames));
  kv.set("bench.noise_scale", fmt::format("{}", bias.noise_scale));
  kv.set("bench.end_bias_sweep", join_doubles(end_bias_sweep));
  kv.set("niah.total_frames", std::to_string(niah_frames));
  kv.set("niah.hops", std::to_string(niah_hops));
  kv.set("niah.signals", join_doubles(niah_signals));
  kv.set("niah.n_repeat", std::to_string(niah_chunk.n_repeat));
  kv.set("niah.n_selected_frames", std::to_string(niah_chunk.n_selected_frames));
  kv.set("output.dir", output_dir.string());
  return kv.to_text();
}

CompressionSchedule RunConfig::schedule() const {
  switch (schedule_kind) {
    case ScheduleKind::kCosine: return CompressionSchedule::cosine(initial_tokens, num_layers);
    case ScheduleKind::kConstant: return CompressionSchedule::constant(initial_tokens, num_layers);
    case ScheduleKind::kStepwise:
      if (!stages.empty()) return CompressionSchedule::stepwise(initial_tokens, num_layers, stages);
      return build_stepwise_matching(initial_tokens, num_layers, stage_count,
                                     CompressionSchedule::cosine(initial_tokens, num_layers).average_tokens_processed());
  }
  throw ValidationError("unreachable schedule kind");
}

ScoringPlan RunConfig::scoring_plan(std::size_t threads) const {
  ScoringPlan p;
  p.global = global_scoring;
  p.segment = segment;
  p.chunk = chunk;
  p.threads = threads;
  return p;
}

NiahSettings RunConfig::niah_settings() const {
  NiahSettings s;
  s.segment = segment;
  s.chunk = niah_chunk;
  return s;
}

}  // namespace vtc
