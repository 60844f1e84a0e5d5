#include "vtc/qc_comp.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <mutex>
#include <numeric>
#include <thread>

#include "vtc/token_layout.hpp"

namespace vtc {

void SegmentConfig::validate() const {
  require(window_frames >= 1, "SegmentConfig: window_frames must be >= 1");
  require(stride_frames >= 1 && stride_frames <= window_frames, "SegmentConfig: stride must be in [1, window_frames]");
  require(clip_size >= 1, "SegmentConfig: clip_size must be >= 1");
}

void ChunkConfig::validate() const {
  require(chunk_frames >= 1, "ChunkConfig: chunk_frames must be >= 1");
  require(n_repeat >= 1, "ChunkConfig: n_repeat must be >= 1");
  require(chunk_frames % n_repeat == 0, "ChunkConfig: chunk_frames must be divisible by n_repeat");
  require(n_selected_frames >= 1, "ChunkConfig: n_selected_frames must be >= 1");
}

std::vector<FrameSpan> segment_windows(std::size_t total_frames, const SegmentConfig& cfg) {
  cfg.validate();
  require(total_frames >= 1, "segment_windows: need at least one frame");
  const std::size_t w = cfg.window_frames;
  if (total_frames <= w) return {{0, total_frames}};
  std::vector<FrameSpan> out;
  for (std::size_t start = 0; start <= total_frames - w; start += cfg.stride_frames) out.push_back({start, w});
  if (out.back().start != total_frames - w) out.push_back({total_frames - w, w});
  return out;
}

std::vector<FrameSpan> chunk_plan(std::size_t total_frames, const ChunkConfig& cfg) {
  cfg.validate();
  require(total_frames >= 1, "chunk_plan: need at least one frame");
  const std::size_t c = cfg.chunk_frames;
  if (total_frames <= c) return {{0, total_frames}};
  std::vector<FrameSpan> out;
  for (std::size_t start = 0; start + c < total_frames; start += cfg.stride()) out.push_back({start, c});
  out.push_back({total_frames - c, c});
  return out;
}

std::vector<std::size_t> span_coverage(std::size_t total_frames, const std::vector<FrameSpan>& spans) {
  std::vector<std::size_t> cover(total_frames, 0);
  for (const auto& s : spans) {
    require(s.end() <= total_frames, "span_coverage: span exceeds the frame range");
    for (std::size_t f = s.start; f < s.end(); ++f) ++cover[f];
  }
  return cover;
}

AttentionBlock::AttentionBlock(std::size_t layers, std::size_t heads, std::size_t frames, std::size_t question_tokens,
                               std::vector<std::size_t> tokens_per_frame)
    : heads_(heads), frames_(frames), question_tokens_(question_tokens), tokens_per_frame_(std::move(tokens_per_frame)) {
  require(layers >= 1 && heads >= 1 && frames >= 1 && question_tokens >= 1,
          "AttentionBlock: layers, heads, frames and question tokens must be >= 1");
  require(tokens_per_frame_.size() == layers, "AttentionBlock: need one tokens_per_frame entry per layer");
  for (auto n : tokens_per_frame_) require(n >= 1, "AttentionBlock: tokens_per_frame must be >= 1");
  data_.resize(layers);
  for (std::size_t l = 0; l < layers; ++l) data_[l].assign(heads_ * question_tokens_ * video_columns(l), 0.0);
}

void AttentionBlock::validate(double tolerance) const {
  for (std::size_t l = 0; l < layers(); ++l) {
    const std::size_t cols = video_columns(l);
    if (data_[l].size() != heads_ * question_tokens_ * cols) {
      throw ValidationError("attention block: layer " + std::to_string(l) + " has the wrong number of values");
    }
    for (std::size_t row = 0; row < heads_ * question_tokens_; ++row) {
      double mass = 0.0;
      for (std::size_t c = 0; c < cols; ++c) {
        const double a = data_[l][row * cols + c];
        if (!std::isfinite(a) || a < 0.0) {
          throw ValidationError("attention block: invalid weight " + std::to_string(a) + " at layer " +
                                std::to_string(l));
        }
        mass += a;
      }
      if (mass > 1.0 + tolerance) {
        throw ValidationError("attention block: question row mass " + std::to_string(mass) + " exceeds 1 at layer " +
                              std::to_string(l) + " head " + std::to_string(row / question_tokens_) + " row " +
                              std::to_string(row % question_tokens_));
      }
    }
  }
}

SegmentScores score_segment(const AttentionBlock& block, FrameSpan window, const SegmentConfig& cfg) {
  cfg.validate();
  require(window.length == block.frames(), "score_segment: block has " + std::to_string(block.frames()) +
                                               " frames, window has " + std::to_string(window.length));
  std::vector<std::size_t> layers = cfg.scoring_layers;
  if (layers.empty()) {
    layers.resize(block.layers());
    std::iota(layers.begin(), layers.end(), std::size_t{0});
  }
  for (auto l : layers) {
    require(l < block.layers(), "score_segment: scoring layer " + std::to_string(l) + " not in the block (" +
                                    std::to_string(block.layers()) + " layers)");
  }

  SegmentScores out;
  out.window = window;
  out.frame_observation.assign(window.length, 0.0);
  for (std::size_t f = 0; f < window.length; ++f) {
    double over_layers = 0.0;
    for (auto l : layers) {
      const std::size_t tpf = block.tokens_per_frame()[l];
      double sum = 0.0;
      for (std::size_t h = 0; h < block.heads(); ++h) {
        for (std::size_t q = 0; q < block.question_tokens(); ++q) {
          for (std::size_t s = 0; s < tpf; ++s) sum += block.at(l, h, q, f * tpf + s);
        }
      }
      over_layers += sum / static_cast<double>(block.heads() * block.question_tokens() * tpf);
    }
    out.frame_observation[f] = over_layers / static_cast<double>(layers.size());
  }

  out.clip.resize(window.length);
  out.frame_score.resize(window.length);
  std::size_t f = 0;
  while (f < window.length) {
    const std::size_t clip = clip_of_frame(window.start + f, cfg.clip_size);
    std::size_t g = f;
    double sum = 0.0;
    while (g < window.length && clip_of_frame(window.start + g, cfg.clip_size) == clip) sum += out.frame_observation[g++];
    const double mean = sum / static_cast<double>(g - f);
    for (std::size_t i = f; i < g; ++i) {
      out.clip[i] = clip;
      out.frame_score[i] = mean;
    }
    f = g;
  }
  return out;
}

void ObservationSet::add(const SegmentScores& s) {
  require(s.window.end() <= values_.size(), "ObservationSet: window exceeds the frame range");
  for (std::size_t i = 0; i < s.window.length; ++i) values_[s.window.start + i].push_back(s.frame_score[i]);
}

FrameScoreTable aggregate(const ObservationSet& observations) {
  FrameScoreTable table;
  table.score.resize(observations.num_frames());
  table.coverage.resize(observations.num_frames());
  for (std::size_t f = 0; f < observations.num_frames(); ++f) {
    std::vector<double> v = observations.of(f);
    if (v.empty()) throw ValidationError("aggregate: frame " + std::to_string(f) + " has no observations");
    std::sort(v.begin(), v.end());
    double sum = 0.0;
    for (double x : v) sum += x;
    table.score[f] = sum / static_cast<double>(v.size());
    table.coverage[f] = v.size();
  }
  return table;
}

FrameScoreTable global_score(const AttentionBlock& block, const SegmentConfig& cfg) {
  ObservationSet obs(block.frames());
  obs.add(score_segment(block, {0, block.frames()}, cfg));
  return aggregate(obs);
}

std::vector<FrameSpan> scoring_windows(std::size_t total_frames, const ScoringPlan& plan) {
  if (plan.global) return {{0, total_frames}};
  std::vector<FrameSpan> out;
  for (const auto& chunk : chunk_plan(total_frames, plan.chunk)) {
    for (const auto& w : segment_windows(chunk.length, plan.segment)) out.push_back({chunk.start + w.start, w.length});
  }
  return out;
}

void WindowMapSource::add(FrameSpan window, AttentionBlock block) {
  require(window.length == block.frames(), "WindowMapSource: block frames do not match the window length");
  frames_ = std::max(frames_, window.end());
  blocks_.emplace_back(window, std::move(block));
}

AttentionBlock WindowMapSource::attend(FrameSpan window) const {
  for (const auto& [w, b] : blocks_)
    if (w == window) return b;
  throw ValidationError("no attention for window start=" + std::to_string(window.start) +
                        " length=" + std::to_string(window.length) +
                        "; segmented scoring needs one block per scoring window");
}

FrameScoreTable score_video(const AttentionSource& source, const ScoringPlan& plan) {
  plan.segment.validate();
  const std::size_t total = source.num_frames();
  const auto windows = scoring_windows(total, plan);
  std::vector<SegmentScores> results(windows.size());
  auto run = [&](std::size_t i) {
    const AttentionBlock block = source.attend(windows[i]);
    block.validate();
    results[i] = score_segment(block, windows[i], plan.segment);
  };

  const std::size_t workers = std::min(plan.threads, windows.size());
  if (workers <= 1) {
    for (std::size_t i = 0; i < windows.size(); ++i) run(i);
  } else {
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    std::vector<std::thread> pool;
    for (std::size_t t = 0; t < workers; ++t) {
      pool.emplace_back([&] {
        for (std::size_t i = next++; i < windows.size(); i = next++) {
          try {
            run(i);
          } catch (...) {
            std::lock_guard lock(failure_mutex);
            if (!failure) failure = std::current_exception();
          }
        }
      });
    }
    for (auto& th : pool) th.join();
    if (failure) std::rethrow_exception(failure);
  }

  ObservationSet obs(total);
  for (const auto& r : results) obs.add(r);
  return aggregate(obs);
}

SelectionResult select_top_k(const FrameScoreTable& table, std::size_t k, bool clip_granularity,
                             std::size_t clip_size) {
  require(k >= 1, "select_top_k: k must be >= 1");
  require(clip_size >= 1, "select_top_k: clip_size must be >= 1");
  const std::size_t n = table.size();
  const std::size_t take = std::min(k, n);
  std::vector<std::size_t> chosen;
  auto better = [&](std::size_t a, double sa, std::size_t b, double sb) { return sa > sb || (sa == sb && a < b); };

  if (!clip_granularity) {
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return better(a, table.score[a], b, table.score[b]); });
    chosen.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(take));
  } else {
    const auto part = ClipPartition::for_frames(n, clip_size);
    std::vector<double> clip_mean(part.num_clips);
    for (std::size_t c = 0; c < part.num_clips; ++c) {
      const auto r = part.frames_of(c);
      double sum = 0.0;
      for (std::size_t f = r.begin; f < r.end; ++f) sum += table.score[f];
      clip_mean[c] = sum / static_cast<double>(r.size());
    }
    std::vector<std::size_t> order(part.num_clips);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return better(a, clip_mean[a], b, clip_mean[b]); });
    for (auto c : order) {
      const auto r = part.frames_of(c);
      for (std::size_t f = r.begin; f < r.end && chosen.size() < take; ++f) chosen.push_back(f);
      if (chosen.size() == take) break;
    }
  }
  std::sort(chosen.begin(), chosen.end());
  SelectionResult out;
  out.frames = chosen;
  for (auto f : chosen) out.scores.push_back(table.score[f]);
  return out;
}

std::size_t rank_of(const FrameScoreTable& table, std::size_t frame) {
  require(frame < table.size(), "rank_of: frame out of range");
  std::size_t rank = 1;
  for (double s : table.score) rank += s > table.score[frame] ? 1 : 0;
  return rank;
}

}  // namespace vtc
