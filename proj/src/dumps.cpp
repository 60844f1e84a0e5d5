#include "vtc/dumps.hpp"

#include <algorithm>
#include <bit>
#include <cstring>
#include <fstream>
#include <sstream>
#include <system_error>

#include "vtc/kv_text.hpp"

namespace vtc {

namespace {

void put_u32(Bytes& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

void put_f32(Bytes& out, float v) { put_u32(out, std::bit_cast<std::uint32_t>(v)); }

std::uint32_t to_u32(std::size_t v, const char* field) {
  if (v > 0xffffffffULL) throw ValidationError(std::string("dump: ") + field + " does not fit in 32 bits");
  return static_cast<std::uint32_t>(v);
}

class Reader {
 public:
  Reader(const Bytes& bytes, const char* kind) : bytes_(bytes), kind_(kind) {}

  std::uint32_t u32(const char* field) {
    need(4, field);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(bytes_[pos_ + static_cast<std::size_t>(i)]) << (8 * i);
    pos_ += 4;
    return v;
  }
  float f32() { return std::bit_cast<float>(u32("payload")); }
  void magic(const char* expect) {
    need(4, "magic");
    if (std::memcmp(bytes_.data(), expect, 4) != 0) {
      throw ValidationError(std::string(kind_) + ": bad magic, expected \"" + expect + "\"");
    }
    pos_ += 4;
  }
  void skip(std::size_t n, const char* field) {
    need(n, field);
    pos_ += n;
  }
  std::size_t pos() const { return pos_; }
  std::size_t remaining() const { return bytes_.size() - pos_; }

 private:
  void need(std::size_t n, const char* field) const {
    if (bytes_.size() - pos_ < n) {
      throw ValidationError(std::string(kind_) + ": truncated while reading " + field + " at byte " +
                            std::to_string(pos_));
    }
  }

  const Bytes& bytes_;
  const char* kind_;
  std::size_t pos_ = 0;
};

std::uint32_t positive(std::uint32_t v, const char* kind, const char* field) {
  if (v == 0) throw ValidationError(std::string(kind) + ": header field " + field + " must be >= 1");
  return v;
}

void check_version(Reader& r, const char* kind) {
  const auto version = r.u32("version");
  if (version != kDumpVersion) {
    throw ValidationError(std::string(kind) + ": unsupported version " + std::to_string(version));
  }
}

template <typename Data>
void write_impl(const std::filesystem::path& path, const Data& contents) {
  const auto dir = path.has_parent_path() ? path.parent_path() : std::filesystem::path(".");
  std::filesystem::path tmp = dir / ("." + path.filename().string() + ".tmp");
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw ValidationError("cannot open " + tmp.string() + " for writing");
    out.write(reinterpret_cast<const char*>(contents.data()), static_cast<std::streamsize>(contents.size()));
    if (!out) throw ValidationError("failed writing " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp);
    throw ValidationError("cannot move " + tmp.string() + " to " + path.string() + ": " + ec.message());
  }
}

std::filesystem::path manifest_path(const std::filesystem::path& path) {
  return std::filesystem::path(path.string() + ".manifest");
}

}  // namespace

Bytes encode_attention_dump(const AttentionBlock& block) {
  Bytes out;
  out.insert(out.end(), {'A', 'T', 'N', 'D'});
  put_u32(out, kDumpVersion);
  put_u32(out, to_u32(block.layers(), "layers"));
  put_u32(out, to_u32(block.heads(), "heads"));
  put_u32(out, to_u32(block.frames(), "frames"));
  put_u32(out, to_u32(block.question_tokens(), "question_tokens"));
  put_u32(out, kElementF32);
  put_u32(out, 0);
  for (auto n : block.tokens_per_frame()) put_u32(out, to_u32(n, "tokens_per_frame"));
  while (out.size() % 8 != 0) out.push_back(0);
  for (std::size_t l = 0; l < block.layers(); ++l) {
    for (double v : block.layer_data(l)) put_f32(out, static_cast<float>(v));
  }
  return out;
}

AttentionBlock decode_attention_dump(const Bytes& bytes) {
  const char* kind = "attention dump";
  Reader r(bytes, kind);
  r.magic("ATND");
  check_version(r, kind);
  const auto layers = positive(r.u32("layers"), kind, "layers");
  const auto heads = positive(r.u32("heads"), kind, "heads");
  const auto frames = positive(r.u32("frames"), kind, "frames");
  const auto nq = positive(r.u32("question_tokens"), kind, "question_tokens");
  const auto element = r.u32("element_type");
  if (element != kElementF32) throw ValidationError("attention dump: unsupported element_type " + std::to_string(element));
  if (r.u32("reserved") != 0) throw ValidationError("attention dump: reserved header field must be 0");
  std::vector<std::size_t> tpf;
  for (std::uint32_t l = 0; l < layers; ++l) tpf.push_back(positive(r.u32("tokens_per_frame"), kind, "tokens_per_frame"));
  r.skip((8 - r.pos() % 8) % 8, "header padding");

  std::size_t expect = 0;
  for (auto n : tpf) expect += static_cast<std::size_t>(heads) * nq * frames * n;
  if (r.remaining() != expect * 4) {
    throw ValidationError("attention dump: payload has " + std::to_string(r.remaining()) + " bytes, header implies " +
                          std::to_string(expect * 4));
  }
  AttentionBlock block(layers, heads, frames, nq, tpf);
  for (std::size_t l = 0; l < layers; ++l) {
    for (auto& v : block.layer_data(l)) v = static_cast<double>(r.f32());
  }
  block.validate(1e-4);
  return block;
}

Bytes encode_token_dump(const TokenTensor<float>& tokens) {
  Bytes out;
  out.insert(out.end(), {'T', 'O', 'K', 'D'});
  put_u32(out, kDumpVersion);
  put_u32(out, to_u32(tokens.frames(), "frames"));
  put_u32(out, to_u32(tokens.slots(), "tokens_per_frame"));
  put_u32(out, to_u32(tokens.width(), "width"));
  put_u32(out, 0);
  for (float v : tokens.data()) put_f32(out, v);
  return out;
}

TokenTensor<float> decode_token_dump(const Bytes& bytes) {
  const char* kind = "token dump";
  Reader r(bytes, kind);
  r.magic("TOKD");
  check_version(r, kind);
  const auto frames = positive(r.u32("frames"), kind, "frames");
  const auto tpf = positive(r.u32("tokens_per_frame"), kind, "tokens_per_frame");
  const auto width = positive(r.u32("width"), kind, "width");
  if (r.u32("reserved") != 0) throw ValidationError("token dump: reserved header field must be 0");
  const std::size_t expect = static_cast<std::size_t>(frames) * tpf * width;
  if (r.remaining() != expect * 4) {
    throw ValidationError("token dump: payload has " + std::to_string(r.remaining()) + " bytes, header implies " +
                          std::to_string(expect * 4));
  }
  std::vector<float> data(expect);
  for (auto& v : data) v = r.f32();
  return TokenTensor<float>(frames, tpf, width, std::move(data));
}

std::string attention_manifest(const AttentionBlock& block) {
  KeyValueText kv;
  kv.set("magic", "ATND");
  kv.set("version", std::to_string(kDumpVersion));
  kv.set("layers", std::to_string(block.layers()));
  kv.set("heads", std::to_string(block.heads()));
  kv.set("frames", std::to_string(block.frames()));
  kv.set("question_tokens", std::to_string(block.question_tokens()));
  kv.set("tokens_per_frame", join_sizes(block.tokens_per_frame()));
  kv.set("element_type", "f32");
  kv.set("values", "probabilities");
  return kv.to_text();
}

std::string token_manifest(const TokenTensor<float>& tokens) {
  KeyValueText kv;
  kv.set("magic", "TOKD");
  kv.set("version", std::to_string(kDumpVersion));
  kv.set("frames", std::to_string(tokens.frames()));
  kv.set("tokens_per_frame", std::to_string(tokens.slots()));
  kv.set("width", std::to_string(tokens.width()));
  kv.set("element_type", "f32");
  return kv.to_text();
}

void write_file_atomic(const std::filesystem::path& path, const std::string& contents) { write_impl(path, contents); }
void write_file_atomic(const std::filesystem::path& path, const Bytes& contents) { write_impl(path, contents); }

Bytes read_file_bytes(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot open " + path.string());
  return Bytes(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

std::string read_file_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_attention_dump(const std::filesystem::path& path, const AttentionBlock& block) {
  write_file_atomic(path, encode_attention_dump(block));
  write_file_atomic(manifest_path(path), attention_manifest(block));
}

AttentionBlock read_attention_dump(const std::filesystem::path& path) {
  try {
    return decode_attention_dump(read_file_bytes(path));
  } catch (const ValidationError& e) {
    throw ValidationError(path.string() + ": " + e.what());
  }
}

void write_token_dump(const std::filesystem::path& path, const TokenTensor<float>& tokens) {
  write_file_atomic(path, encode_token_dump(tokens));
  write_file_atomic(manifest_path(path), token_manifest(tokens));
}

TokenTensor<float> read_token_dump(const std::filesystem::path& path) {
  try {
    return decode_token_dump(read_file_bytes(path));
  } catch (const ValidationError& e) {
    throw ValidationError(path.string() + ": " + e.what());
  }
}

DumpIndex DumpIndex::parse(const std::string& text, const std::filesystem::path& base) {
  DumpIndex idx;
  std::istringstream in(text);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    std::istringstream fields(line);
    std::string start, length, path, extra;
    if (!(fields >> start)) continue;
    if (!(fields >> length >> path) || (fields >> extra)) {
      throw ValidationError("dump index line " + std::to_string(lineno) + ": expected \"start length path\"");
    }
    FrameSpan span{parse_size(start, "dump index start"), parse_size(length, "dump index length")};
    if (span.length == 0) throw ValidationError("dump index line " + std::to_string(lineno) + ": length must be >= 1");
    std::filesystem::path p(path);
    if (p.is_relative()) p = base / p;
    idx.entries.emplace_back(span, p);
  }
  if (idx.entries.empty()) throw ValidationError("dump index has no entries");
  return idx;
}

DumpIndex DumpIndex::load(const std::filesystem::path& path) {
  return parse(read_file_text(path), path.has_parent_path() ? path.parent_path() : std::filesystem::path("."));
}

std::string DumpIndex::to_text() const {
  std::string out;
  for (const auto& [span, path] : entries) {
    out += std::to_string(span.start) + " " + std::to_string(span.length) + " " + path.string() + "\n";
  }
  return out;
}

std::size_t DumpIndex::num_frames() const {
  std::size_t n = 0;
  for (const auto& e : entries) n = std::max(n, e.first.end());
  return n;
}

DumpIndexSource::DumpIndexSource(DumpIndex index) : index_(std::move(index)), frames_(index_.num_frames()) {}

AttentionBlock DumpIndexSource::attend(FrameSpan window) const {
  for (const auto& [span, path] : index_.entries) {
    if (span == window) {
      auto block = read_attention_dump(path);
      if (block.frames() != window.length) {
        throw ValidationError(path.string() + ": dump has " + std::to_string(block.frames()) +
                              " frames, index says " + std::to_string(window.length));
      }
      return block;
    }
  }
  throw ValidationError("dump index has no entry for window start=" + std::to_string(window.start) +
                        " length=" + std::to_string(window.length));
}

}  // namespace vtc
