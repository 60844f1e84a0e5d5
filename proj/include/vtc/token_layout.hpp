#pragma once

#include <cstddef>
#include <utility>

// Indexing between frames, clips, within-frame token slots and flattened
// sequence positions. Every index here is 0-based: frame f, slot s, clip c
// and layer l all start at 0. Where the usual notation is 1-based (frame
// f = 1..T, layer l = 1..L) subtract one.

namespace vtc {

/// Half-open index range [begin, end).
struct IndexRange {
  std::size_t begin = 0;
  std::size_t end = 0;

  std::size_t size() const { return end - begin; }
  bool empty() const { return begin == end; }
  bool contains(std::size_t i) const { return i >= begin && i < end; }
  bool operator==(const IndexRange&) const = default;
};

/// T frames of N visual tokens each, followed by N_q question tokens.
struct FrameGrid {
  std::size_t num_frames = 1;
  std::size_t tokens_per_frame = 1;
  std::size_t question_tokens = 0;

  void validate() const;
  std::size_t video_length() const { return num_frames * tokens_per_frame; }
  std::size_t sequence_length() const { return video_length() + question_tokens; }
};

struct SequenceRanges {
  IndexRange video;
  IndexRange question;
};

/// Video occupies [0, T*N); the question is appended right after it.
SequenceRanges sequence_positions(const FrameGrid& grid);

std::size_t clip_of_frame(std::size_t frame, std::size_t clip_size);

/// frame * tokens_per_frame + slot. Throws PreconditionError when slot is out of range.
std::size_t global_slot(std::size_t frame, std::size_t slot, std::size_t tokens_per_frame);

/// Inverse of global_slot: returns (frame, slot).
std::pair<std::size_t, std::size_t> split_slot(std::size_t position, std::size_t tokens_per_frame);

/// Frames grouped into consecutive clips; the last clip may be short.
struct ClipPartition {
  std::size_t clip_size = 8;
  std::size_t num_frames = 0;
  std::size_t num_clips = 0;

  static ClipPartition for_frames(std::size_t num_frames, std::size_t clip_size = 8);
  IndexRange frames_of(std::size_t clip) const;
};

}  // namespace vtc
