#include "vtc/cli.hpp"

#include <CLI11.hpp>
#include <fmt/format.h>

#include <cstdlib>
#include <limits>
#include <map>
#include <optional>
#include <ostream>
#include <random>
#include <sstream>

#include "vtc/bench.hpp"
#include "vtc/cost_model.hpp"
#include "vtc/dumps.hpp"
#include "vtc/kv_text.hpp"
#include "vtc/lp_comp.hpp"
#include "vtc/qc_comp.hpp"
#include "vtc/reports.hpp"
#include "vtc/run_config.hpp"
#include "vtc/schedule.hpp"
#include "vtc/toy/attention_source.hpp"

namespace vtc {

namespace {

namespace fs = std::filesystem;

CLI::Range positive() { return CLI::Range(std::size_t{1}, std::numeric_limits<std::size_t>::max()); }

struct CommonOptions {
  std::string config;
  std::vector<std::string> overrides;
};

void add_common(CLI::App* cmd, CommonOptions& common) {
  cmd->add_option("--config", common.config, std::string("RunConfig file (default: $") + kConfigEnv + ")");
  cmd->add_option("--set", common.overrides, "Override one config key, key=value (repeatable)");
}

RunConfig load_config(const CommonOptions& common) {
  std::string path = common.config;
  if (path.empty()) {
    if (const char* env = std::getenv(kConfigEnv); env != nullptr) path = env;
  }
  KeyValueText kv = path.empty() ? KeyValueText{} : KeyValueText::parse(read_file_text(path));
  for (const auto& o : common.overrides) {
    const auto eq = o.find('=');
    if (eq == std::string::npos || eq == 0) throw ValidationError("--set expects key=value, got '" + o + "'");
    kv.set(o.substr(0, eq), o.substr(eq + 1));
  }
  try {
    return RunConfig::from_text(kv.to_text());
  } catch (const ValidationError& e) {
    throw ValidationError((path.empty() ? std::string("config") : path) + ": " + e.what());
  }
}

// Writes `text` to `path` atomically, or to `out` when no path is given.
void emit(const std::string& path, const std::string& text, std::ostream& out) {
  if (path.empty() || path == "-") {
    out << text;
  } else {
    write_file_atomic(path, text);
  }
}

struct ScheduleOptions {
  std::optional<std::string> kind;
  std::optional<std::size_t> n1;
  std::optional<std::size_t> layers;
  std::optional<std::string> stages;
  std::optional<std::size_t> stage_count;
  std::optional<std::string> strategy;
};

void add_schedule_options(CLI::App* cmd, ScheduleOptions& s) {
  cmd->add_option("--kind", s.kind, "Schedule family")->check(CLI::IsMember({"cosine", "stepwise", "constant"}));
  cmd->add_option("--n1", s.n1, "Tokens per frame entering the first layer")->check(positive());
  cmd->add_option("--layers", s.layers, "Number of transformer layers")->check(positive());
  cmd->add_option("--stages", s.stages, "Stepwise plateaus, layer:tokens,...");
  cmd->add_option("--stage-count", s.stage_count, "Plateaus when matching the cosine average (stepwise)")
      ->check(CLI::Range(2, 1 << 20));
  cmd->add_option("--strategy", s.strategy, "Drop strategy")->check(CLI::IsMember({"suffix", "uniform"}));
}

void apply_schedule_options(const ScheduleOptions& s, RunConfig& c) {
  if (s.kind) c.schedule_kind = parse_schedule_kind(*s.kind);
  if (s.n1) c.initial_tokens = *s.n1;
  if (s.layers) c.num_layers = *s.layers;
  if (s.stage_count) c.stage_count = *s.stage_count;
  if (s.strategy) c.strategy = parse_drop_strategy(*s.strategy);
  if (s.stages) {
    KeyValueText kv;
    kv.set("schedule.kind", "stepwise");
    kv.set("schedule.initial_tokens", std::to_string(c.initial_tokens));
    kv.set("schedule.num_layers", std::to_string(c.num_layers));
    kv.set("schedule.stages", *s.stages);
    c.stages = RunConfig::from_text(kv.to_text()).stages;
  }
}

struct ScoringOptions {
  std::optional<std::size_t> window, stride, clip, chunk, n_repeat, k;
  std::optional<std::string> layers;
  bool global = false;
  std::size_t threads = 0;
};

void add_scoring_options(CLI::App* cmd, ScoringOptions& s) {
  cmd->add_option("--window", s.window, "Segment window in frames")->check(positive());
  cmd->add_option("--stride", s.stride, "Segment stride in frames")->check(positive());
  cmd->add_option("--clip", s.clip, "Frames per clip")->check(positive());
  cmd->add_option("--chunk", s.chunk, "Chunk length in frames")->check(positive());
  cmd->add_option("--n-repeat", s.n_repeat, "Chunks covering each interior frame")->check(positive());
  cmd->add_option("--scoring-layers", s.layers, "Comma list of block layers to average (default all)");
  cmd->add_flag("--global", s.global, "Score with one window over the whole video");
  cmd->add_option("--threads", s.threads, "Worker threads (output does not depend on this)");
}

void apply_scoring_options(const ScoringOptions& s, RunConfig& c) {
  if (s.window) c.segment.window_frames = *s.window;
  if (s.stride) c.segment.stride_frames = *s.stride;
  if (s.clip) c.segment.clip_size = *s.clip;
  if (s.chunk) c.chunk.chunk_frames = *s.chunk;
  if (s.n_repeat) c.chunk.n_repeat = *s.n_repeat;
  if (s.layers) c.segment.scoring_layers = parse_size_list(*s.layers, "--scoring-layers");
  if (s.global) c.global_scoring = true;
  try {
    c.segment.validate();
    c.chunk.validate();
  } catch (const PreconditionError& e) {
    throw ValidationError(e.what());
  }
}

std::string schedule_table(const CompressionSchedule& s) {
  std::string out = fmt::format("kind={} initial_tokens={} num_layers={}\n", to_string(s.kind()), s.initial_tokens(),
                                s.num_layers());
  out += fmt::format("{:>6} {:>7}\n", "layer", "tokens");
  for (std::size_t l = 0; l <= s.num_layers(); ++l) out += fmt::format("{:>6} {:>7}\n", l, s.tokens_at(l));
  out += fmt::format("average tokens processed: {}\n", s.average_tokens_processed());
  return out;
}

std::vector<std::vector<std::string>> read_csv(const std::string& text) {
  std::vector<std::vector<std::string>> rows;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    rows.push_back(std::move(cells));
  }
  return rows;
}

std::string report_of(const std::string& path) {
  const auto rows = read_csv(read_file_text(path));
  if (rows.empty()) throw ValidationError(path + ": empty report");
  const auto& header = rows.front();
  auto column = [&](const std::string& name) {
    for (std::size_t i = 0; i < header.size(); ++i)
      if (header[i] == name) return i;
    throw ValidationError(path + ": missing column " + name);
  };
  auto cell = [&](const std::vector<std::string>& row, std::size_t i) -> const std::string& {
    if (i >= row.size()) throw ValidationError(path + ": short row");
    return row[i];
  };
  std::string out;
  if (header.front() == "seed") {
    const auto sig = column("signal"), rec = column("recovered");
    std::map<double, std::pair<std::size_t, std::size_t>> by_signal;
    for (std::size_t r = 1; r < rows.size(); ++r) {
      auto& [runs, ok] = by_signal[parse_double(cell(rows[r], sig), "signal")];
      ++runs;
      ok += cell(rows[r], rec) == "1" ? 1 : 0;
    }
    out += fmt::format("{}: needle-in-a-haystack, {} runs\n{:>8} {:>6} {:>9} {:>7}\n", path, rows.size() - 1,
                       "signal", "runs", "recovered", "rate");
    for (const auto& [s, v] : by_signal) {
      out += fmt::format("{:>8} {:>6} {:>9} {:>6.1f}%\n", s, v.first, v.second,
                         100.0 * static_cast<double>(v.second) / static_cast<double>(v.first));
    }
  } else if (header.front() == "fixture") {
    const auto name = column("fixture"), ae = column("end_bias"), g = column("global_rank"),
               s = column("segmented_rank");
    out += fmt::format("{}: position bias\n{:>10} {:>9} {:>12} {:>15}\n", path, "fixture", "end_bias", "global_rank",
                       "segmented_rank");
    for (std::size_t r = 1; r < rows.size(); ++r) {
      out += fmt::format("{:>10} {:>9} {:>12} {:>15}\n", cell(rows[r], name), cell(rows[r], ae), cell(rows[r], g),
                         cell(rows[r], s));
    }
  } else {
    throw ValidationError(path + ": not a bench report");
  }
  return out;
}

TokenTensor<float> random_tokens(std::size_t frames, std::size_t tokens, std::size_t width, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<float> u(-1.0f, 1.0f);
  TokenTensor<float> t(frames, tokens, width);
  for (auto& v : t.data()) v = u(rng);
  return t;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Video token compression: schedules, drop plans, frame scoring, cost model and benches", "vtc"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "vtc 0.1.0");

  // schedule
  CommonOptions sch_common;
  ScheduleOptions sch_opts;
  std::string sch_format = "table", sch_output;
  auto* sch = app.add_subcommand("schedule", "Per-layer tokens per frame of a schedule");
  add_common(sch, sch_common);
  add_schedule_options(sch, sch_opts);
  sch->add_option("--format", sch_format, "Output format")->check(CLI::IsMember({"table", "csv"}));
  sch->add_option("-o,--output", sch_output, "Write the CSV here");

  // plan
  CommonOptions plan_common;
  ScheduleOptions plan_opts;
  std::string plan_output;
  auto* plan_cmd = app.add_subcommand("plan", "Kept slots of every transition of a drop plan");
  add_common(plan_cmd, plan_common);
  add_schedule_options(plan_cmd, plan_opts);
  plan_cmd->add_option("-o,--output", plan_output, "Write the plan text here");

  // gen-tokens
  std::size_t gen_frames = 8, gen_tokens = 16, gen_width = 32;
  std::uint64_t gen_seed = 0;
  std::string gen_output;
  auto* gen = app.add_subcommand("gen-tokens", "Write a synthetic token dump");
  gen->add_option("--frames", gen_frames, "Frames")->check(positive());
  gen->add_option("--tokens", gen_tokens, "Tokens per frame")->check(positive());
  gen->add_option("--width", gen_width, "Embedding width")->check(positive());
  gen->add_option("--seed", gen_seed, "Random seed");
  gen->add_option("-o,--output", gen_output, "Output token dump")->required();

  // compress
  CommonOptions cmp_common;
  ScheduleOptions cmp_opts;
  std::string cmp_input, cmp_output;
  auto* cmp = app.add_subcommand("compress", "Apply a drop plan to a token dump");
  add_common(cmp, cmp_common);
  add_schedule_options(cmp, cmp_opts);
  cmp->add_option("-i,--input", cmp_input, "Input token dump")->required();
  cmp->add_option("-o,--output", cmp_output, "Output token dump")->required();

  // dump-attention
  CommonOptions dump_common;
  ScoringOptions dump_scoring;
  std::string dump_source = "toy", dump_dir, dump_tokens_in;
  std::size_t dump_frames = 16, dump_tokens = 4, dump_nq = 2;
  std::uint64_t dump_seed = 0;
  bool dump_compress = false;
  auto* dump = app.add_subcommand("dump-attention", "Write per-window attention dumps and an index");
  add_common(dump, dump_common);
  add_scoring_options(dump, dump_scoring);
  dump->add_option("--source", dump_source, "Attention source")->check(CLI::IsMember({"toy", "oracle"}));
  dump->add_option("--out-dir", dump_dir, "Directory for dumps and index.txt")->required();
  dump->add_option("--frames", dump_frames, "Frames (toy source)")->check(positive());
  dump->add_option("--tokens", dump_tokens, "Tokens per frame (toy source)")->check(positive());
  dump->add_option("--question-tokens", dump_nq, "Question tokens (toy source)")->check(positive());
  dump->add_option("--seed", dump_seed, "Seed for toy weights and inputs");
  dump->add_option("--tokens-input", dump_tokens_in, "Token dump to feed the toy model instead of random tokens");
  dump->add_flag("--compress", dump_compress, "Run the toy model with a cosine suffix plan");

  // score
  CommonOptions score_common;
  ScoringOptions score_opts;
  std::string score_attention, score_index, score_out, score_sel;
  auto* score = app.add_subcommand("score", "Score frames from attention dumps and select the top k");
  add_common(score, score_common);
  add_scoring_options(score, score_opts);
  auto* att_opt = score->add_option("--attention", score_attention, "A single attention dump");
  auto* idx_opt = score->add_option("--index", score_index, "Dump index: lines of \"start length path\"");
  att_opt->excludes(idx_opt);
  score->add_option("--k", score_opts.k, "Frames to select")->check(positive());
  score->add_option("--scores", score_out, "Write frame,score,coverage,selected CSV here (default stdout)");
  score->add_option("--selection", score_sel, "Write the selection CSV here");

  // flops
  CommonOptions flops_common;
  ScheduleOptions flops_sched;
  std::optional<std::string> flops_frames, flops_unit, flops_placement;
  std::optional<std::size_t> flops_query, d_layers, d_width, d_heads, d_kv, d_head, d_mlp;
  bool flops_causal = false;
  std::string flops_csv;
  auto* flops = app.add_subcommand("flops", "Prefill FLOPs with and without compression");
  add_common(flops, flops_common);
  add_schedule_options(flops, flops_sched);
  flops->add_option("--frames", flops_frames, "Comma list of frame counts");
  flops->add_option("--query-tokens", flops_query, "Question tokens");
  flops->add_option("--unit", flops_unit, "Count a MAC as 2 FLOPs or 1")->check(CLI::IsMember({"flops", "macs"}));
  flops->add_option("--placement", flops_placement, "Which count a layer sees when its count changes")
      ->check(CLI::IsMember({"after_layer", "before_layer"}));
  flops->add_flag("--causal-half", flops_causal, "Halve the attention S^2 term");
  flops->add_option("--model-layers", d_layers, "Model layers")->check(positive());
  flops->add_option("--model-width", d_width, "Hidden width")->check(positive());
  flops->add_option("--heads", d_heads, "Attention heads")->check(positive());
  flops->add_option("--kv-heads", d_kv, "Key/value heads")->check(positive());
  flops->add_option("--head-width", d_head, "Head width")->check(positive());
  flops->add_option("--mlp-width", d_mlp, "MLP width")->check(positive());
  flops->add_option("--csv", flops_csv, "Write the CSV here (default: after the table on stdout)");

  // bench
  auto* bench = app.add_subcommand("bench", "Synthetic benchmarks");
  bench->require_subcommand(1);
  CommonOptions bias_common;
  bool bias_sweep_flag = false;
  std::string bias_out;
  auto* bias = bench->add_subcommand("bias", "Position-bias fixtures: needle rank under global and segmented scoring");
  add_common(bias, bias_common);
  bias->add_flag("--sweep", bias_sweep_flag, "Also sweep the end bias");
  bias->add_option("-o,--output", bias_out, "Write the CSV here (default stdout)");

  CommonOptions niah_common;
  std::optional<std::size_t> niah_seeds, niah_hops, niah_frames;
  std::optional<std::string> niah_signals;
  std::string niah_out, niah_summary;
  std::size_t niah_threads = 0;
  auto* niah = bench->add_subcommand("niah", "Multi-hop needle-in-a-haystack recovery");
  add_common(niah, niah_common);
  niah->add_option("--seeds", niah_seeds, "Seeds per signal level");
  niah->add_option("--hops", niah_hops, "Hops per instance")->check(positive());
  niah->add_option("--frames", niah_frames, "Frames per video")->check(positive());
  niah->add_option("--signals", niah_signals, "Comma list of signal levels");
  niah->add_option("--threads", niah_threads, "Worker threads per scoring run");
  niah->add_option("-o,--output", niah_out, "Write per-run CSV here (default stdout)");
  niah->add_option("--summary", niah_summary, "Write the per-signal summary CSV here");

  // report
  std::vector<std::string> report_files;
  auto* report = app.add_subcommand("report", "Summarize bench CSV reports");
  report->add_option("files", report_files, "bench bias / bench niah CSV files")->required();

  // config
  CommonOptions cfg_common;
  auto* cfg_cmd = app.add_subcommand("config", "Print the effective configuration");
  add_common(cfg_cmd, cfg_common);

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (sch->parsed()) {
      auto c = load_config(sch_common);
      apply_schedule_options(sch_opts, c);
      const auto s = c.schedule();
      if (!sch_output.empty()) write_file_atomic(sch_output, schedule_csv(s));
      out << (sch_format == "csv" ? schedule_csv(s) : schedule_table(s));
    } else if (plan_cmd->parsed()) {
      auto c = load_config(plan_common);
      apply_schedule_options(plan_opts, c);
      emit(plan_output, c.plan().to_text(), out);
    } else if (gen->parsed()) {
      write_token_dump(gen_output, random_tokens(gen_frames, gen_tokens, gen_width, gen_seed));
      out << fmt::format("wrote {} ({} frames x {} tokens x {})\n", gen_output, gen_frames, gen_tokens, gen_width);
    } else if (cmp->parsed()) {
      auto c = load_config(cmp_common);
      apply_schedule_options(cmp_opts, c);
      const auto tokens = read_token_dump(cmp_input);
      const auto p = c.plan();
      if (tokens.slots() != p.initial_tokens()) {
        throw ValidationError(fmt::format("{}: tokens_per_frame={} does not match plan initial_tokens={}", cmp_input,
                                          tokens.slots(), p.initial_tokens()));
      }
      const auto result = apply_plan(tokens, p);
      write_token_dump(cmp_output, result);
      out << fmt::format("wrote {} ({} frames x {} tokens x {})\n", cmp_output, result.frames(), result.slots(),
                         result.width());
    } else if (dump->parsed()) {
      auto c = load_config(dump_common);
      apply_scoring_options(dump_scoring, c);
      fs::create_directories(dump_dir);
      std::unique_ptr<AttentionSource> source;
      std::optional<DropPlan> toy_plan;
      if (dump_source == "toy") {
        toy::ToyConfig tc;
        TokenTensor<float> tokens = dump_tokens_in.empty()
                                        ? random_tokens(dump_frames, dump_tokens, tc.model_width, dump_seed)
                                        : read_token_dump(dump_tokens_in);
        if (tokens.width() != tc.model_width) {
          throw ValidationError(fmt::format("token width {} does not match the toy model width {}", tokens.width(),
                                            tc.model_width));
        }
        toy::ForwardInputs<float> in;
        in.video = std::move(tokens);
        std::mt19937_64 rng(dump_seed ^ 0x71756573ULL);
        std::uniform_real_distribution<float> u(-1.0f, 1.0f);
        in.question.resize(static_cast<Eigen::Index>(dump_nq), static_cast<Eigen::Index>(tc.model_width));
        for (Eigen::Index i = 0; i < in.question.size(); ++i) in.question.data()[i] = u(rng);
        if (dump_compress) {
          toy_plan = build_plan(CompressionSchedule::cosine(in.video.slots(), tc.num_layers), DropStrategy::kSuffix);
        }
        source = std::make_unique<toy::ToyAttentionSource<float>>(toy::init_params<float>(tc, dump_seed), tc,
                                                                   std::move(in), toy_plan ? &*toy_plan : nullptr);
      } else {
        source = std::make_unique<BiasOracle>(c.bias);
      }
      DumpIndex index;
      for (const auto& w : scoring_windows(source->num_frames(), c.scoring_plan())) {
        const bool seen = std::any_of(index.entries.begin(), index.entries.end(),
                                      [&](const auto& e) { return e.first == w; });
        if (seen) continue;
        const std::string name = fmt::format("window_{}_{}.atnd", w.start, w.length);
        write_attention_dump(fs::path(dump_dir) / name, source->attend(w));
        index.entries.emplace_back(w, name);
      }
      write_file_atomic(fs::path(dump_dir) / "index.txt", index.to_text());
      out << fmt::format("wrote {} dumps and {}\n", index.entries.size(), (fs::path(dump_dir) / "index.txt").string());
    } else if (score->parsed()) {
      auto c = load_config(score_common);
      apply_scoring_options(score_opts, c);
      if (score_attention.empty() && score_index.empty()) {
        throw CLI::RequiredError("--attention or --index");
      }
      FrameScoreTable table;
      const auto plan = c.scoring_plan(score_opts.threads);
      if (!score_index.empty()) {
        table = score_video(DumpIndexSource(DumpIndex::load(score_index)), plan);
      } else {
        auto block = read_attention_dump(score_attention);
        WindowMapSource src;
        const std::size_t frames = block.frames();
        src.add({0, frames}, std::move(block));
        table = score_video(src, plan);
      }
      const std::size_t k = score_opts.k.value_or(c.chunk.n_selected_frames);
      const auto sel = select_top_k(table, k);
      emit(score_out, score_csv(table, sel), out);
      if (!score_sel.empty()) write_file_atomic(score_sel, selection_csv(sel));
    } else if (flops->parsed()) {
      auto c = load_config(flops_common);
      apply_schedule_options(flops_sched, c);
      if (flops_frames) c.cost_frames = parse_size_list(*flops_frames, "--frames");
      if (flops_query) c.query_tokens = *flops_query;
      if (flops_unit) c.cost.unit = parse_flop_unit(*flops_unit);
      if (flops_placement) c.cost.placement = parse_drop_placement(*flops_placement);
      if (flops_causal) c.cost.causal_half = true;
      if (d_layers) c.dims.num_layers = *d_layers;
      if (d_width) c.dims.model_width = *d_width;
      if (d_heads) c.dims.num_attention_heads = *d_heads;
      if (d_kv) c.dims.num_kv_heads = *d_kv;
      if (d_head) c.dims.head_width = *d_head;
      if (d_mlp) c.dims.mlp_width = *d_mlp;
      if (d_layers && !flops_sched.layers) c.num_layers = c.dims.num_layers;
      const auto r = prefill_report(c.cost_frames, c.query_tokens, c.schedule(), c.dims, c.cost);
      out << r.to_table();
      if (flops_csv.empty()) {
        out << "\n" << r.to_csv();
      } else {
        write_file_atomic(flops_csv, r.to_csv());
      }
    } else if (bias->parsed()) {
      const auto c = load_config(bias_common);
      std::vector<BiasReportRow> rows;
      auto run = [&](const std::string& name, const BiasOracleConfig& oc) {
        const auto r = bias_experiment(oc, c.segment);
        rows.push_back({name, oc, r.global_rank, r.segmented_rank});
      };
      run("biased", c.bias);
      BiasOracleConfig flat = c.bias;
      flat.begin_bias = 0.0;
      flat.end_bias = 0.0;
      run("unbiased", flat);
      if (bias_sweep_flag) {
        for (double a : c.end_bias_sweep) {
          BiasOracleConfig oc = c.bias;
          oc.end_bias = a;
          run("sweep", oc);
        }
      }
      emit(bias_out, bias_csv(rows), out);
    } else if (niah->parsed()) {
      auto c = load_config(niah_common);
      if (niah_seeds) c.seeds = *niah_seeds;
      if (niah_hops) c.niah_hops = *niah_hops;
      if (niah_frames) c.niah_frames = *niah_frames;
      if (niah_signals) {
        KeyValueText kv;
        kv.set("niah.signals", *niah_signals);
        c.niah_signals = RunConfig::from_text(kv.to_text()).niah_signals;
      }
      auto settings = c.niah_settings();
      settings.threads = niah_threads;
      std::vector<NiahReportRow> rows;
      std::vector<NiahSummary> summary;
      for (double s : c.niah_signals) {
        NiahSummary sum;
        sum.signal = s;
        for (std::size_t i = 0; i < c.seeds; ++i) {
          const auto inst = NiahInstance::make(c.niah_frames, c.niah_hops, s, c.bias.seed + i, c.segment.clip_size);
          auto res = niah_run(inst, settings);
          ++sum.runs;
          sum.recovered += res.recovered ? 1 : 0;
          rows.push_back({inst, s, std::move(res)});
        }
        summary.push_back(sum);
      }
      emit(niah_out, niah_csv(rows), out);
      if (!niah_summary.empty()) write_file_atomic(niah_summary, niah_summary_csv(summary));
    } else if (report->parsed()) {
      for (const auto& f : report_files) out << report_of(f);
    } else if (cfg_cmd->parsed()) {
      out << load_config(cfg_common).to_text();
    }
  } catch (const CLI::ParseError& e) {
    err << "vtc: " << e.what() << "\n";
    return kExitUsage;
  } catch (const ValidationError& e) {
    err << "vtc: validation error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const NumericError& e) {
    err << "vtc: numeric error: " << e.what() << "\n";
    return kExitNumeric;
  } catch (const ScheduleConstructionError& e) {
    err << "vtc: " << e.what() << "\n";
    return kExitNumeric;
  } catch (const PreconditionError& e) {
    err << "vtc: invalid arguments: " << e.what() << "\n";
    return kExitUsage;
  }
  return kExitOk;
}

}  // namespace vtc
