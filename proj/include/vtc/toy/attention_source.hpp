#pragma once

#include "vtc/qc_comp.hpp"
#include "vtc/toy/transformer.hpp"

namespace vtc::toy {

/// Runs the toy model on [window frames, question] with positions local to
/// the window and returns the question-to-video attention of every layer.
template <typename T>
class ToyAttentionSource final : public AttentionSource {
 public:
  ToyAttentionSource(Parameters<T> params, ToyConfig config, ForwardInputs<T> inputs, const DropPlan* plan = nullptr);

  std::size_t num_frames() const override { return inputs_.video.frames(); }
  AttentionBlock attend(FrameSpan window) const override;

 private:
  Parameters<T> params_;
  ToyConfig config_;
  ForwardInputs<T> inputs_;
  const DropPlan* plan_;
};

/// Question-to-video attention of one forward trace (recorded attention required).
template <typename T>
AttentionBlock attention_block_of(const ForwardTrace<T>& trace);

}  // namespace vtc::toy
