#pragma once

// Question-conditioned frame scoring.
//
// A window of frames is run through the model together with the question;
// each frame's observation is the mean attention its video tokens receive
// from the question rows. Observations are averaged per clip, every frame in
// the window inherits its clip's mean, and the per-frame observations from
// all windows (and chunks) are averaged into the final score.

#include <cstddef>
#include <cmath>
#include <string>
#include <utility>
#include <vector>

#include "vtc/errors.hpp"

namespace vtc {

/// `length` frames starting at absolute frame `start`.
struct FrameSpan {
  std::size_t start = 0;
  std::size_t length = 0;

  std::size_t end() const { return start + length; }
  bool contains(std::size_t frame) const { return frame >= start && frame < end(); }
  bool operator==(const FrameSpan&) const = default;
};

struct SegmentConfig {
  std::size_t window_frames = 64;
  std::size_t stride_frames = 32;
  std::size_t clip_size = 8;
  /// Layer indices (into the attention block) to average. Empty means all.
  std::vector<std::size_t> scoring_layers;

  void validate() const;
};

struct ChunkConfig {
  std::size_t chunk_frames = 512;
  std::size_t n_repeat = 2;
  std::size_t n_selected_frames = 512;

  void validate() const;
  std::size_t stride() const { return chunk_frames / n_repeat; }
};

/// Windows inside [0, total_frames): starts 0, stride, ... up to total - w,
/// plus a tail window at total - w when the stride does not land on it.
std::vector<FrameSpan> segment_windows(std::size_t total_frames, const SegmentConfig& cfg);

/// Overlapping chunks; the final start is clamped to total - chunk_frames.
std::vector<FrameSpan> chunk_plan(std::size_t total_frames, const ChunkConfig& cfg);

/// Number of spans containing each frame.
std::vector<std::size_t> span_coverage(std::size_t total_frames, const std::vector<FrameSpan>& spans);

/// Attention from the question rows to the video columns of one window,
/// per layer and head. Layer l has tokens_per_frame[l] columns per frame, so
/// a block can describe a compressed layout.
class AttentionBlock {
 public:
  AttentionBlock() = default;
  AttentionBlock(std::size_t layers, std::size_t heads, std::size_t frames, std::size_t question_tokens,
                 std::vector<std::size_t> tokens_per_frame);

  std::size_t layers() const { return tokens_per_frame_.size(); }
  std::size_t heads() const { return heads_; }
  std::size_t frames() const { return frames_; }
  std::size_t question_tokens() const { return question_tokens_; }
  const std::vector<std::size_t>& tokens_per_frame() const { return tokens_per_frame_; }
  std::size_t video_columns(std::size_t layer) const { return frames_ * tokens_per_frame_.at(layer); }

  double& at(std::size_t layer, std::size_t head, std::size_t q, std::size_t column) {
    return data_[layer][(head * question_tokens_ + q) * video_columns(layer) + column];
  }
  double at(std::size_t layer, std::size_t head, std::size_t q, std::size_t column) const {
    return data_[layer][(head * question_tokens_ + q) * video_columns(layer) + column];
  }
  /// Row-major heads x question_tokens x video_columns values of one layer.
  const std::vector<double>& layer_data(std::size_t layer) const { return data_.at(layer); }
  std::vector<double>& layer_data(std::size_t layer) { return data_.at(layer); }

  /// Entries finite and non-negative; each row's video mass at most 1 + tolerance.
  /// Throws ValidationError.
  void validate(double tolerance = 1e-4) const;

  bool operator==(const AttentionBlock&) const = default;

 private:
  std::size_t heads_ = 0;
  std::size_t frames_ = 0;
  std::size_t question_tokens_ = 0;
  std::vector<std::size_t> tokens_per_frame_;
  std::vector<std::vector<double>> data_;
};

/// Builds a block from full S x S maps over [video, question] (maps[l][h]).
/// Checks causality and row normalization within `tolerance` first.
template <typename Map>
AttentionBlock extract_question_attention(const std::vector<std::vector<Map>>& maps, std::size_t frames,
                                          const std::vector<std::size_t>& tokens_per_frame,
                                          std::size_t question_tokens, double tolerance = 1e-4) {
  require(!maps.empty() && maps.size() == tokens_per_frame.size(),
          "extract_question_attention: need one tokens_per_frame entry per layer");
  const std::size_t heads = maps.front().size();
  AttentionBlock block(maps.size(), heads, frames, question_tokens, tokens_per_frame);
  for (std::size_t l = 0; l < maps.size(); ++l) {
    const std::size_t video = frames * tokens_per_frame[l];
    const std::size_t seq = video + question_tokens;
    if (maps[l].size() != heads) throw ValidationError("attention: layer " + std::to_string(l) + " head count differs");
    for (std::size_t h = 0; h < heads; ++h) {
      const Map& m = maps[l][h];
      if (static_cast<std::size_t>(m.rows()) != seq || static_cast<std::size_t>(m.cols()) != seq) {
        throw ValidationError("attention: layer " + std::to_string(l) + " map is not " + std::to_string(seq) +
                              " x " + std::to_string(seq));
      }
      for (std::size_t i = 0; i < seq; ++i) {
        double total = 0.0;
        for (std::size_t j = 0; j < seq; ++j) {
          const double a = static_cast<double>(m(i, j));
          if (j > i && a != 0.0) {
            throw ValidationError("attention: acausal weight at layer " + std::to_string(l) + " head " +
                                  std::to_string(h) + " row " + std::to_string(i));
          }
          total += a;
        }
        if (!(std::abs(total - 1.0) <= tolerance)) {
          throw ValidationError("attention: row " + std::to_string(i) + " of layer " + std::to_string(l) +
                                " head " + std::to_string(h) + " sums to " + std::to_string(total));
        }
      }
      for (std::size_t q = 0; q < question_tokens; ++q) {
        for (std::size_t c = 0; c < video; ++c) {
          block.at(l, h, q, c) = static_cast<double>(m(video + q, c));
        }
      }
    }
  }
  block.validate(tolerance);
  return block;
}

/// Produces the attention block for a window of absolute frames. Must be
/// safe to call concurrently.
class AttentionSource {
 public:
  virtual ~AttentionSource() = default;
  virtual std::size_t num_frames() const = 0;
  virtual AttentionBlock attend(FrameSpan window) const = 0;
};

/// Blocks for fixed windows held in memory; attend() of any other window
/// throws ValidationError.
class WindowMapSource final : public AttentionSource {
 public:
  void add(FrameSpan window, AttentionBlock block);
  std::size_t num_frames() const override { return frames_; }
  AttentionBlock attend(FrameSpan window) const override;

 private:
  std::size_t frames_ = 0;
  std::vector<std::pair<FrameSpan, AttentionBlock>> blocks_;
};

struct SegmentScores {
  FrameSpan window;
  /// Mean attention per frame before clip bucketing.
  std::vector<double> frame_observation;
  /// Absolute clip index of each frame.
  std::vector<std::size_t> clip;
  /// Clip mean assigned back to each frame: the frame's observation for this window.
  std::vector<double> frame_score;
};

/// `block` must describe exactly `window.length` frames; clips are computed
/// from absolute frame indices.
SegmentScores score_segment(const AttentionBlock& block, FrameSpan window, const SegmentConfig& cfg);

/// Per-frame observation multisets.
class ObservationSet {
 public:
  explicit ObservationSet(std::size_t num_frames) : values_(num_frames) {}

  std::size_t num_frames() const { return values_.size(); }
  void add(std::size_t frame, double value) { values_.at(frame).push_back(value); }
  void add(const SegmentScores& s);
  const std::vector<double>& of(std::size_t frame) const { return values_.at(frame); }

 private:
  std::vector<std::vector<double>> values_;
};

struct FrameScoreTable {
  std::vector<double> score;
  std::vector<std::size_t> coverage;

  std::size_t size() const { return score.size(); }
};

/// Mean per frame, summed in sorted order so arrival order cannot change bits.
/// Throws ValidationError naming the first frame with no observations.
FrameScoreTable aggregate(const ObservationSet& observations);

/// Scoring a single window over all frames.
FrameScoreTable global_score(const AttentionBlock& block, const SegmentConfig& cfg);

struct ScoringPlan {
  bool global = false;
  SegmentConfig segment;
  ChunkConfig chunk;
  /// 0 runs on the calling thread; results are identical for every value.
  std::size_t threads = 0;
};

/// Chunks x windows of the plan, in the fixed order observations are reduced.
std::vector<FrameSpan> scoring_windows(std::size_t total_frames, const ScoringPlan& plan);

FrameScoreTable score_video(const AttentionSource& source, const ScoringPlan& plan);

struct SelectionResult {
  std::vector<std::size_t> frames;  // ascending
  std::vector<double> scores;
};

/// The min(k, T) best frames, ties to the earlier frame, returned in temporal
/// order. With clip_granularity, whole clips are ranked by mean score and
/// taken in order until k frames are chosen.
SelectionResult select_top_k(const FrameScoreTable& table, std::size_t k, bool clip_granularity = false,
                             std::size_t clip_size = 8);

/// 1 + the number of frames scoring strictly higher.
std::size_t rank_of(const FrameScoreTable& table, std::size_t frame);

}  // namespace vtc
