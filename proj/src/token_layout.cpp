#include "vtc/token_layout.hpp"

#include <string>

#include "vtc/errors.hpp"

namespace vtc {

void FrameGrid::validate() const {
  require(num_frames >= 1, "FrameGrid: num_frames must be >= 1");
  require(tokens_per_frame >= 1, "FrameGrid: tokens_per_frame must be >= 1");
}

SequenceRanges sequence_positions(const FrameGrid& grid) {
  grid.validate();
  const std::size_t video_end = grid.video_length();
  return {{0, video_end}, {video_end, video_end + grid.question_tokens}};
}

std::size_t clip_of_frame(std::size_t frame, std::size_t clip_size) {
  require(clip_size >= 1, "clip_of_frame: clip_size must be >= 1");
  return frame / clip_size;
}

std::size_t global_slot(std::size_t frame, std::size_t slot, std::size_t tokens_per_frame) {
  if (slot >= tokens_per_frame) {
    throw PreconditionError("global_slot: slot " + std::to_string(slot) +
                            " out of range for " + std::to_string(tokens_per_frame) +
                            " tokens per frame");
  }
  return frame * tokens_per_frame + slot;
}

std::pair<std::size_t, std::size_t> split_slot(std::size_t position, std::size_t tokens_per_frame) {
  require(tokens_per_frame >= 1, "split_slot: tokens_per_frame must be >= 1");
  return {position / tokens_per_frame, position % tokens_per_frame};
}

ClipPartition ClipPartition::for_frames(std::size_t num_frames, std::size_t clip_size) {
  require(clip_size >= 1, "ClipPartition: clip_size must be >= 1");
  require(num_frames >= 1, "ClipPartition: num_frames must be >= 1");
  return {clip_size, num_frames, (num_frames + clip_size - 1) / clip_size};
}

IndexRange ClipPartition::frames_of(std::size_t clip) const {
  require(clip < num_clips, "ClipPartition: clip index out of range");
  const std::size_t begin = clip * clip_size;
  const std::size_t end = begin + clip_size < num_frames ? begin + clip_size : num_frames;
  return {begin, end};
}

}  // namespace vtc
