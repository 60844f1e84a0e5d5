#pragma once

// Synthetic attention with a controllable edge bias, and a multi-hop
// needle-in-a-haystack protocol built on it.
//
// For a window of `len` frames, frame f at window position p gets, on every
// one of its token columns, the logit
//   noise + begin_bias * exp(-p / decay) + end_bias * exp(-(len - 1 - p) / decay)
//         + needle_signal * [f == needle_frame]
// Question row q additionally sees question columns 0..q with logit 0; the
// row is softmax-normalized over everything it can see.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "vtc/qc_comp.hpp"

namespace vtc {

struct BiasOracleConfig {
  std::size_t total_frames = 256;
  std::size_t tokens_per_frame = 4;
  std::size_t question_tokens = 4;
  std::size_t layers = 1;
  std::size_t heads = 2;
  double begin_bias = 0.0;
  double end_bias = 0.0;
  double decay_frames = 48.0;
  std::size_t needle_frame = 128;
  double needle_signal = 0.0;
  /// Noise is uniform in [-noise_scale, noise_scale].
  double noise_scale = 0.5;
  std::uint64_t seed = 0;
  /// Extra noise key; NIAH rounds use it to draw fresh noise.
  std::uint64_t round = 0;

  void validate() const;
};

class BiasOracle final : public AttentionSource {
 public:
  explicit BiasOracle(BiasOracleConfig cfg);

  const BiasOracleConfig& config() const { return cfg_; }
  std::size_t num_frames() const override { return cfg_.total_frames; }
  AttentionBlock attend(FrameSpan window) const override;

  /// Full softmax row of question token q: the window's video columns, then
  /// question columns 0..q.
  std::vector<double> question_row(FrameSpan window, std::size_t layer, std::size_t head, std::size_t q) const;

 private:
  double logit(FrameSpan window, std::size_t layer, std::size_t head, std::size_t q, std::size_t frame,
               std::size_t slot) const;

  BiasOracleConfig cfg_;
};

struct BiasResult {
  std::size_t global_rank = 0;
  std::size_t segmented_rank = 0;
  FrameScoreTable global;
  FrameScoreTable segmented;
};

/// Global and segmented scoring of the same oracle; ranks of the needle.
BiasResult bias_experiment(const BiasOracleConfig& cfg, const SegmentConfig& segment);

struct BiasSweepRow {
  double end_bias = 0.0;
  std::size_t global_rank = 0;
  std::size_t segmented_rank = 0;
};

std::vector<BiasSweepRow> bias_sweep(BiasOracleConfig cfg, const SegmentConfig& segment,
                                     const std::vector<double>& end_biases);

/// Largest swept end bias up to which the segmented rank stays 1, if any.
std::optional<double> segmented_ceiling(const std::vector<BiasSweepRow>& rows);

/// The frozen fixtures: a mid-video needle with a strong end bias, and the
/// same needle with no bias.
BiasOracleConfig biased_fixture();
BiasOracleConfig unbiased_fixture();
SegmentConfig fixture_segment_config();

struct NiahInstance {
  std::size_t total_frames = 2048;
  std::vector<std::size_t> hop_frames;
  std::vector<double> hop_signals;
  std::uint64_t seed = 0;

  std::size_t hops() const { return hop_frames.size(); }
  void validate() const;

  /// Hop frames drawn without replacement from distinct clips.
  static NiahInstance make(std::size_t total_frames, std::size_t hops, double signal, std::uint64_t seed,
                           std::size_t clip_size = 8);
};

struct NiahSettings {
  SegmentConfig segment;
  ChunkConfig chunk{512, 8, 1};
  std::size_t tokens_per_frame = 2;
  std::size_t question_tokens = 2;
  std::size_t threads = 0;
};

struct NiahResult {
  bool recovered = false;
  std::size_t rounds_run = 0;
  std::vector<bool> found;
  std::vector<std::size_t> selected;  // frame chosen each round
  std::vector<std::size_t> ranks;     // rank of the hop frame each round
};

/// Round r plants hop r's signal only when hops 0..r-1 were found. A hop is
/// found when a selected frame lies in the hop frame's clip.
NiahResult niah_run(const NiahInstance& instance, const NiahSettings& settings);

struct NiahSummary {
  double signal = 0.0;
  std::size_t runs = 0;
  std::size_t recovered = 0;

  double rate() const { return runs == 0 ? 0.0 : static_cast<double>(recovered) / static_cast<double>(runs); }
};

/// Runs seeds first_seed .. first_seed + seeds - 1 at one signal level.
NiahSummary niah_recovery(std::size_t total_frames, std::size_t hops, double signal, std::uint64_t first_seed,
                          std::size_t seeds, const NiahSettings& settings);

}  // namespace vtc
