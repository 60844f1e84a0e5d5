#pragma once

// Desk-scale decoder-only transformer used to exercise token compression
// end to end.
//
// Layer (pre-norm):   h = rms(x)*g1;  x += Attn(h) Wo
//                     h = rms(x)*g2;  x += gelu(h W1 + b1) W2 + b2
// Attention is causal multi-head softmax(Q K^T / sqrt(d_h)) V with no
// projection biases. Inputs are pre-embedded video tokens followed by the
// question tokens; a sinusoidal absolute position is added once at the
// input and travels with each token, so tokens that survive a drop keep
// their original position. A linear regression head reads the final
// normalized state of the last question token.
//
// Compression: after layer l the video rows are reduced with transition l of
// the supplied DropPlan. Question rows are never dropped.

#include <Eigen/Core>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "vtc/lp_comp.hpp"
#include "vtc/token_tensor.hpp"

namespace vtc::toy {

template <typename T>
using Matrix = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
template <typename T>
using Vector = Eigen::Matrix<T, Eigen::Dynamic, 1>;

struct ToyConfig {
  std::size_t num_layers = 4;
  std::size_t num_heads = 2;
  std::size_t model_width = 32;
  std::size_t mlp_width = 64;
  std::size_t output_width = 4;
  std::size_t max_sequence = 1 << 16;
  /// Rows of the question embedding table; 0 means questions arrive pre-embedded.
  std::size_t vocab_size = 0;
  double norm_epsilon = 1e-6;

  std::size_t head_width() const { return model_width / num_heads; }
  void validate() const;
};

template <typename T>
struct LayerParams {
  Matrix<T> query;   // d x d
  Matrix<T> key;     // d x d
  Matrix<T> value;   // d x d
  Matrix<T> output;  // d x d
  Vector<T> attn_gain;
  Matrix<T> mlp_in;  // d x d_ff
  Vector<T> mlp_in_bias;
  Matrix<T> mlp_out;  // d_ff x d
  Vector<T> mlp_out_bias;
  Vector<T> mlp_gain;
};

template <typename T>
struct Parameters {
  std::vector<LayerParams<T>> layers;
  Vector<T> final_gain;
  Matrix<T> head;       // output_width x d
  Matrix<T> embedding;  // vocab_size x d, empty when vocab_size == 0

  /// Calls f(name, span) for every tensor in a fixed order.
  template <typename F>
  void visit(F&& f) {
    visit_impl(*this, f);
  }
  template <typename F>
  void visit(F&& f) const {
    visit_impl(*this, f);
  }

  Parameters zeros_like() const;
  std::size_t count() const;
  bool all_finite() const;
  bool operator==(const Parameters& other) const;

 private:
  template <typename Self, typename F>
  static void visit_impl(Self& self, F& f) {
    auto span_of = [](auto& m) { return std::span(m.data(), static_cast<std::size_t>(m.size())); };
    for (std::size_t l = 0; l < self.layers.size(); ++l) {
      auto& p = self.layers[l];
      const std::string pre = "layer" + std::to_string(l) + ".";
      f(pre + "query", span_of(p.query));
      f(pre + "key", span_of(p.key));
      f(pre + "value", span_of(p.value));
      f(pre + "output", span_of(p.output));
      f(pre + "attn_gain", span_of(p.attn_gain));
      f(pre + "mlp_in", span_of(p.mlp_in));
      f(pre + "mlp_in_bias", span_of(p.mlp_in_bias));
      f(pre + "mlp_out", span_of(p.mlp_out));
      f(pre + "mlp_out_bias", span_of(p.mlp_out_bias));
      f(pre + "mlp_gain", span_of(p.mlp_gain));
    }
    f(std::string("final_gain"), span_of(self.final_gain));
    f(std::string("head"), span_of(self.head));
    f(std::string("embedding"), span_of(self.embedding));
  }
};

/// Deterministic per seed. Matrices are uniform in +-1/sqrt(fan_in); gains
/// start at 1 and biases at 0; embedding rows are uniform in +-1.
template <typename T>
Parameters<T> init_params(const ToyConfig& config, std::uint64_t seed);

template <typename T>
struct ForwardInputs {
  TokenTensor<T> video;            // frames x N1 x d
  Matrix<T> question;              // N_q x d, used when question_ids is empty
  std::vector<std::size_t> question_ids;  // rows of the embedding table

  std::size_t question_tokens() const {
    return question_ids.empty() ? static_cast<std::size_t>(question.rows()) : question_ids.size();
  }
};

/// Where a sequence row came from.
struct TokenOrigin {
  bool is_video = true;
  std::size_t frame = 0;  // video only
  std::size_t slot = 0;   // original within-frame slot (video) or question index
  std::size_t position = 0;
  bool operator==(const TokenOrigin&) const = default;
};

template <typename T>
struct ForwardOptions {
  const DropPlan* plan = nullptr;
  bool record_attention = false;
  /// Called with each layer's output before that layer's drop is applied.
  std::function<void(std::size_t layer, Matrix<T>& output, const std::vector<TokenOrigin>& rows)>
      on_layer_output;
};

namespace detail {
template <typename T>
struct LayerCache {
  Matrix<T> x, n1, h1, q, k, v, o, x2, n2, h2, u, z;
  Vector<T> inv1, inv2;
  std::vector<Matrix<T>> probs;  // per head, S x S
  std::vector<std::size_t> kept_rows;  // rows of this layer's output that survive
};
}  // namespace detail

template <typename T>
struct ForwardTrace {
  std::size_t num_frames = 0;
  std::size_t question_tokens = 0;
  /// Per layer input l = 0..L-1, plus the post-compression output at index L.
  std::vector<Matrix<T>> layer_inputs;
  std::vector<std::vector<TokenOrigin>> rows;
  std::vector<std::size_t> video_tokens_per_frame;
  std::vector<std::size_t> sequence_lengths;
  /// attention[l][h] is S_l x S_l; empty unless record_attention was set.
  std::vector<std::vector<Matrix<T>>> attention;
  Vector<T> final_state;  // normalized last question token
  Vector<T> output;

  std::vector<detail::LayerCache<T>> cache;
  Vector<T> final_inv;
  Vector<T> final_normed;
};

/// Throws PreconditionError when shapes disagree with the config or the
/// plan was built for a different N1 / L.
template <typename T>
ForwardTrace<T> forward(const Parameters<T>& params, const ToyConfig& config, const ForwardInputs<T>& inputs,
                        const ForwardOptions<T>& options = {});

template <typename T>
struct LossAndGradients {
  T loss{};
  Parameters<T> gradients;
};

/// Mean squared error of the regression head against `target` and its exact
/// gradient. Drops act as fixed row selections in the backward pass.
/// Throws NumericError naming the first layer with non-finite activations.
template <typename T>
LossAndGradients<T> loss_and_backward(const Parameters<T>& params, const ToyConfig& config,
                                      const ForwardInputs<T>& inputs, const Vector<T>& target,
                                      const DropPlan* plan = nullptr);

template <typename T>
T loss_only(const Parameters<T>& params, const ToyConfig& config, const ForwardInputs<T>& inputs,
            const Vector<T>& target, const DropPlan* plan = nullptr,
            const ForwardOptions<T>& options = {});

/// One fixed input and target, generated from a seed.
template <typename T>
struct MemorizationTask {
  ForwardInputs<T> inputs;
  Vector<T> target;

  static MemorizationTask make(const ToyConfig& config, std::size_t frames, std::size_t tokens_per_frame,
                               std::size_t question_tokens, std::uint64_t seed);
};

template <typename T>
struct TrainResult {
  Parameters<T> params;
  std::vector<T> losses;  // loss before each update
};

/// Plain gradient descent. Throws NumericError naming the step on divergence.
template <typename T>
TrainResult<T> train_steps(Parameters<T> params, const ToyConfig& config, const DropPlan* plan,
                           const MemorizationTask<T>& task, std::size_t steps, T learning_rate);

struct GradientCheckResult {
  double max_relative_error = 0.0;
  std::string worst_tensor;
  std::size_t worst_index = 0;
  std::size_t entries_checked = 0;
};

/// Compares loss_and_backward against central differences at `step` for every
/// parameter entry. Relative error is |a - n| / max(|a|, |n|, floor).
template <typename T>
GradientCheckResult gradient_check(const Parameters<T>& params, const ToyConfig& config,
                                   const ForwardInputs<T>& inputs, const Vector<T>& target, const DropPlan* plan,
                                   double step = 1e-4, double floor = 1e-8);

/// Sinusoidal absolute encoding of one position.
template <typename T>
Vector<T> position_encoding(std::size_t position, std::size_t width);

}  // namespace vtc::toy
