#include "vtc/toy/attention_source.hpp"

#include <algorithm>

namespace vtc::toy {

template <typename T>
ToyAttentionSource<T>::ToyAttentionSource(Parameters<T> params, ToyConfig config, ForwardInputs<T> inputs,
                                          const DropPlan* plan)
    : params_(std::move(params)), config_(config), inputs_(std::move(inputs)), plan_(plan) {
  config_.validate();
}

template <typename T>
AttentionBlock attention_block_of(const ForwardTrace<T>& trace) {
  require(!trace.attention.empty(), "attention_block_of: trace has no recorded attention");
  const std::vector<std::size_t> tpf(trace.video_tokens_per_frame.begin(),
                                     trace.video_tokens_per_frame.begin() +
                                         static_cast<std::ptrdiff_t>(trace.attention.size()));
  return extract_question_attention(trace.attention, trace.num_frames, tpf, trace.question_tokens);
}

template <typename T>
AttentionBlock ToyAttentionSource<T>::attend(FrameSpan window) const {
  require(window.length >= 1 && window.end() <= num_frames(), "ToyAttentionSource: window outside the video");
  ForwardInputs<T> local;
  const auto& v = inputs_.video;
  local.video = TokenTensor<T>(window.length, v.slots(), v.width());
  const auto src = v.data().subspan(window.start * v.slots() * v.width(), local.video.size());
  std::copy(src.begin(), src.end(), local.video.data().begin());
  local.question = inputs_.question;
  local.question_ids = inputs_.question_ids;
  ForwardOptions<T> opts;
  opts.plan = plan_;
  opts.record_attention = true;
  return attention_block_of(forward(params_, config_, local, opts));
}

template class ToyAttentionSource<float>;
template class ToyAttentionSource<double>;
template AttentionBlock attention_block_of<float>(const ForwardTrace<float>&);
template AttentionBlock attention_block_of<double>(const ForwardTrace<double>&);

}  // namespace vtc::toy
