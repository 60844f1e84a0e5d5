#include "vtc/bench.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "vtc/token_layout.hpp"

namespace vtc {

namespace {

std::uint64_t splitmix(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Uniform in [-1, 1), a pure function of its keys.
double hashed_uniform(std::initializer_list<std::uint64_t> keys) {
  std::uint64_t h = 0x5bd1e9955bd1e995ULL;
  for (auto k : keys) h = splitmix(h ^ k);
  return static_cast<double>(h >> 11) * (2.0 / 9007199254740992.0) - 1.0;
}

}  // namespace

void BiasOracleConfig::validate() const {
  require(total_frames >= 1 && tokens_per_frame >= 1 && question_tokens >= 1 && layers >= 1 && heads >= 1,
          "BiasOracleConfig: sizes must be >= 1");
  require(needle_frame < total_frames, "BiasOracleConfig: needle_frame must be in [0, total_frames)");
  require(begin_bias >= 0.0 && end_bias >= 0.0 && needle_signal >= 0.0 && noise_scale >= 0.0,
          "BiasOracleConfig: biases, signal and noise must be non-negative");
  require(decay_frames > 0.0, "BiasOracleConfig: decay_frames must be positive");
}

BiasOracle::BiasOracle(BiasOracleConfig cfg) : cfg_(cfg) { cfg_.validate(); }

double BiasOracle::logit(FrameSpan window, std::size_t layer, std::size_t head, std::size_t q, std::size_t frame,
                         std::size_t slot) const {
  const double pos = static_cast<double>(frame - window.start);
  const double from_end = static_cast<double>(window.length - 1) - pos;
  double z = cfg_.noise_scale * hashed_uniform({cfg_.seed, cfg_.round, frame, slot, q, layer, head});
  z += cfg_.begin_bias * std::exp(-pos / cfg_.decay_frames);
  z += cfg_.end_bias * std::exp(-from_end / cfg_.decay_frames);
  if (frame == cfg_.needle_frame) z += cfg_.needle_signal;
  return z;
}

std::vector<double> BiasOracle::question_row(FrameSpan window, std::size_t layer, std::size_t head,
                                             std::size_t q) const {
  require(window.length >= 1 && window.end() <= cfg_.total_frames, "BiasOracle: window outside the video");
  require(layer < cfg_.layers && head < cfg_.heads && q < cfg_.question_tokens, "BiasOracle: index out of range");
  const std::size_t tpf = cfg_.tokens_per_frame;
  std::vector<double> row(window.length * tpf + q + 1, 0.0);
  for (std::size_t f = 0; f < window.length; ++f) {
    for (std::size_t s = 0; s < tpf; ++s) row[f * tpf + s] = logit(window, layer, head, q, window.start + f, s);
  }
  const double peak = *std::max_element(row.begin(), row.end());
  double total = 0.0;
  for (auto& v : row) {
    v = std::exp(v - peak);
    total += v;
  }
  for (auto& v : row) v /= total;
  return row;
}

AttentionBlock BiasOracle::attend(FrameSpan window) const {
  AttentionBlock block(cfg_.layers, cfg_.heads, window.length, cfg_.question_tokens,
                       std::vector<std::size_t>(cfg_.layers, cfg_.tokens_per_frame));
  const std::size_t cols = window.length * cfg_.tokens_per_frame;
  for (std::size_t l = 0; l < cfg_.layers; ++l) {
    for (std::size_t h = 0; h < cfg_.heads; ++h) {
      for (std::size_t q = 0; q < cfg_.question_tokens; ++q) {
        const auto row = question_row(window, l, h, q);
        for (std::size_t c = 0; c < cols; ++c) block.at(l, h, q, c) = row[c];
      }
    }
  }
  return block;
}

BiasResult bias_experiment(const BiasOracleConfig& cfg, const SegmentConfig& segment) {
  const BiasOracle oracle(cfg);
  BiasResult r;
  ScoringPlan plan;
  plan.segment = segment;
  plan.chunk.chunk_frames = std::max<std::size_t>(cfg.total_frames, 1);
  plan.chunk.n_repeat = 1;
  plan.global = true;
  r.global = score_video(oracle, plan);
  plan.global = false;
  r.segmented = score_video(oracle, plan);
  r.global_rank = rank_of(r.global, cfg.needle_frame);
  r.segmented_rank = rank_of(r.segmented, cfg.needle_frame);
  return r;
}

std::vector<BiasSweepRow> bias_sweep(BiasOracleConfig cfg, const SegmentConfig& segment,
                                     const std::vector<double>& end_biases) {
  std::vector<BiasSweepRow> rows;
  for (double a : end_biases) {
    cfg.end_bias = a;
    const auto r = bias_experiment(cfg, segment);
    rows.push_back({a, r.global_rank, r.segmented_rank});
  }
  return rows;
}

std::optional<double> segmented_ceiling(const std::vector<BiasSweepRow>& rows) {
  std::optional<double> ceiling;
  for (const auto& r : rows) {
    if (r.segmented_rank != 1) break;
    ceiling = r.end_bias;
  }
  return ceiling;
}

BiasOracleConfig biased_fixture() {
  BiasOracleConfig c;
  c.total_frames = 256;
  c.needle_frame = 128;
  c.end_bias = 4.0;
  c.needle_signal = 4.8;
  c.seed = 7;
  return c;
}

BiasOracleConfig unbiased_fixture() {
  BiasOracleConfig c = biased_fixture();
  c.end_bias = 0.0;
  return c;
}

SegmentConfig fixture_segment_config() { return SegmentConfig{}; }

void NiahInstance::validate() const {
  require(!hop_frames.empty(), "NiahInstance: need at least one hop");
  require(hop_signals.size() == hop_frames.size(), "NiahInstance: one signal per hop");
  for (std::size_t i = 0; i < hop_frames.size(); ++i) {
    require(hop_frames[i] < total_frames, "NiahInstance: hop frame out of range");
    require(hop_signals[i] >= 0.0, "NiahInstance: signals must be non-negative");
    for (std::size_t j = 0; j < i; ++j) require(hop_frames[j] != hop_frames[i], "NiahInstance: hop frames must be distinct");
  }
}

NiahInstance NiahInstance::make(std::size_t total_frames, std::size_t hops, double signal, std::uint64_t seed,
                                std::size_t clip_size) {
  const auto part = ClipPartition::for_frames(total_frames, clip_size);
  require(hops >= 1 && hops <= part.num_clips, "NiahInstance: hop count must be in [1, number of clips]");
  std::mt19937_64 rng(splitmix(seed ^ 0x6e696168ULL));
  std::vector<std::size_t> clips(part.num_clips);
  std::iota(clips.begin(), clips.end(), std::size_t{0});
  NiahInstance inst;
  inst.total_frames = total_frames;
  inst.seed = seed;
  for (std::size_t h = 0; h < hops; ++h) {
    std::uniform_int_distribution<std::size_t> pick(h, clips.size() - 1);
    std::swap(clips[h], clips[pick(rng)]);
    const auto r = part.frames_of(clips[h]);
    std::uniform_int_distribution<std::size_t> in_clip(r.begin, r.end - 1);
    inst.hop_frames.push_back(in_clip(rng));
    inst.hop_signals.push_back(signal);
  }
  return inst;
}

NiahResult niah_run(const NiahInstance& instance, const NiahSettings& settings) {
  instance.validate();
  NiahResult result;
  bool chain_intact = true;
  for (std::size_t r = 0; r < instance.hops(); ++r) {
    BiasOracleConfig oc;
    oc.total_frames = instance.total_frames;
    oc.tokens_per_frame = settings.tokens_per_frame;
    oc.question_tokens = settings.question_tokens;
    oc.heads = 1;
    oc.needle_frame = instance.hop_frames[r];
    oc.needle_signal = chain_intact ? instance.hop_signals[r] : 0.0;
    oc.seed = instance.seed;
    oc.round = r;
    const BiasOracle oracle(oc);

    ScoringPlan plan;
    plan.segment = settings.segment;
    plan.chunk = settings.chunk;
    plan.threads = settings.threads;
    const auto table = score_video(oracle, plan);
    const auto pick = select_top_k(table, settings.chunk.n_selected_frames);
    const std::size_t clip = settings.segment.clip_size;
    const bool hit = std::any_of(pick.frames.begin(), pick.frames.end(), [&](std::size_t f) {
      return clip_of_frame(f, clip) == clip_of_frame(instance.hop_frames[r], clip);
    });
    result.selected.push_back(pick.frames.front());
    result.ranks.push_back(rank_of(table, instance.hop_frames[r]));
    result.found.push_back(hit);
    result.rounds_run = r + 1;
    chain_intact = chain_intact && hit;
  }
  result.recovered = chain_intact;
  return result;
}

NiahSummary niah_recovery(std::size_t total_frames, std::size_t hops, double signal, std::uint64_t first_seed,
                          std::size_t seeds, const NiahSettings& settings) {
  NiahSummary s;
  s.signal = signal;
  for (std::size_t i = 0; i < seeds; ++i) {
    const auto inst = NiahInstance::make(total_frames, hops, signal, first_seed + i, settings.segment.clip_size);
    s.recovered += niah_run(inst, settings).recovered ? 1 : 0;
    ++s.runs;
  }
  return s;
}

}  // namespace vtc
