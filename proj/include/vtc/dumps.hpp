#pragma once

// Binary dumps, little-endian throughout.
//
// ATND (attention):
//   0  char[4] "ATND"
//   4  u32 version (1)
//   8  u32 layers
//  12  u32 heads
//  16  u32 frames
//  20  u32 question_tokens
//  24  u32 element type (1 = f32)
//  28  u32 reserved (0)
//  32  u32 tokens_per_frame[layers], zero-padded to a multiple of 8 bytes
//      f32 payload: per layer, per head, the question-row x video-column block
//
// TOKD (tokens):
//   0  char[4] "TOKD"
//   4  u32 version (1)
//   8  u32 frames
//  12  u32 tokens_per_frame
//  16  u32 width
//  20  u32 reserved (0)
//  24  f32 payload, frames x tokens_per_frame x width
//
// Writers also emit "<path>.manifest", a key=value mirror of the header.

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "vtc/qc_comp.hpp"
#include "vtc/token_tensor.hpp"

namespace vtc {

inline constexpr std::uint32_t kDumpVersion = 1;
inline constexpr std::uint32_t kElementF32 = 1;

using Bytes = std::vector<std::uint8_t>;

/// Values are stored as f32; a block built from f32 data round-trips exactly.
Bytes encode_attention_dump(const AttentionBlock& block);
/// Throws ValidationError naming the offending header field or payload problem.
AttentionBlock decode_attention_dump(const Bytes& bytes);

Bytes encode_token_dump(const TokenTensor<float>& tokens);
TokenTensor<float> decode_token_dump(const Bytes& bytes);

std::string attention_manifest(const AttentionBlock& block);
std::string token_manifest(const TokenTensor<float>& tokens);

/// Writes to a sibling temporary file and renames it into place.
void write_file_atomic(const std::filesystem::path& path, const std::string& contents);
void write_file_atomic(const std::filesystem::path& path, const Bytes& contents);
Bytes read_file_bytes(const std::filesystem::path& path);
std::string read_file_text(const std::filesystem::path& path);

void write_attention_dump(const std::filesystem::path& path, const AttentionBlock& block);
AttentionBlock read_attention_dump(const std::filesystem::path& path);
void write_token_dump(const std::filesystem::path& path, const TokenTensor<float>& tokens);
TokenTensor<float> read_token_dump(const std::filesystem::path& path);

/// Lines "start length path" mapping windows to attention dumps; relative
/// paths resolve against the index file's directory. `#` starts a comment.
struct DumpIndex {
  std::vector<std::pair<FrameSpan, std::filesystem::path>> entries;

  static DumpIndex parse(const std::string& text, const std::filesystem::path& base);
  static DumpIndex load(const std::filesystem::path& path);
  std::string to_text() const;
  std::size_t num_frames() const;
};

/// Serves windows from the dumps of an index, loading each on demand.
class DumpIndexSource final : public AttentionSource {
 public:
  explicit DumpIndexSource(DumpIndex index);

  std::size_t num_frames() const override { return frames_; }
  AttentionBlock attend(FrameSpan window) const override;

 private:
  DumpIndex index_;
  std::size_t frames_;
};

}  // namespace vtc
