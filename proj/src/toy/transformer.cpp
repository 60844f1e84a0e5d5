#include "vtc/toy/transformer.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "vtc/errors.hpp"

namespace vtc::toy {

void ToyConfig::validate() const {
  require(num_layers >= 1, "ToyConfig: num_layers must be >= 1");
  require(num_heads >= 1 && model_width >= 1 && mlp_width >= 1 && output_width >= 1,
          "ToyConfig: widths and head count must be >= 1");
  require(model_width % num_heads == 0, "ToyConfig: model_width must be a multiple of num_heads");
  require(norm_epsilon > 0.0, "ToyConfig: norm_epsilon must be positive");
}

template <typename T>
Parameters<T> Parameters<T>::zeros_like() const {
  Parameters<T> z = *this;
  z.visit([](const std::string&, std::span<T> s) { std::fill(s.begin(), s.end(), T{0}); });
  return z;
}

template <typename T>
std::size_t Parameters<T>::count() const {
  std::size_t n = 0;
  visit([&](const std::string&, std::span<const T> s) { n += s.size(); });
  return n;
}

template <typename T>
bool Parameters<T>::all_finite() const {
  bool ok = true;
  visit([&](const std::string&, std::span<const T> s) {
    for (T v : s) ok = ok && std::isfinite(v);
  });
  return ok;
}

template <typename T>
bool Parameters<T>::operator==(const Parameters& other) const {
  std::vector<std::span<const T>> a, b;
  visit([&](const std::string&, std::span<const T> s) { a.push_back(s); });
  other.visit([&](const std::string&, std::span<const T> s) { b.push_back(s); });
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (!std::equal(a[i].begin(), a[i].end(), b[i].begin(), b[i].end())) return false;
  }
  return true;
}

template <typename T>
Parameters<T> init_params(const ToyConfig& config, std::uint64_t seed) {
  config.validate();
  std::mt19937_64 rng(seed);
  const auto d = static_cast<Eigen::Index>(config.model_width);
  const auto ff = static_cast<Eigen::Index>(config.mlp_width);
  auto uniform = [&](Eigen::Index rows, Eigen::Index cols, double fan_in) {
    const double a = 1.0 / std::sqrt(fan_in);
    std::uniform_real_distribution<double> dist(-a, a);
    Matrix<T> m(rows, cols);
    for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = static_cast<T>(dist(rng));
    return m;
  };
  Parameters<T> p;
  p.layers.resize(config.num_layers);
  for (auto& l : p.layers) {
    l.query = uniform(d, d, static_cast<double>(d));
    l.key = uniform(d, d, static_cast<double>(d));
    l.value = uniform(d, d, static_cast<double>(d));
    l.output = uniform(d, d, static_cast<double>(d));
    l.attn_gain = Vector<T>::Ones(d);
    l.mlp_in = uniform(d, ff, static_cast<double>(d));
    l.mlp_in_bias = Vector<T>::Zero(ff);
    l.mlp_out = uniform(ff, d, static_cast<double>(ff));
    l.mlp_out_bias = Vector<T>::Zero(d);
    l.mlp_gain = Vector<T>::Ones(d);
  }
  p.final_gain = Vector<T>::Ones(d);
  p.head = uniform(static_cast<Eigen::Index>(config.output_width), d, static_cast<double>(d));
  p.embedding = uniform(static_cast<Eigen::Index>(config.vocab_size), d, 1.0);
  return p;
}

template <typename T>
Vector<T> position_encoding(std::size_t position, std::size_t width) {
  Vector<T> pe(static_cast<Eigen::Index>(width));
  for (std::size_t i = 0; i < width; ++i) {
    const double pair = static_cast<double>(i / 2 * 2);
    const double angle = static_cast<double>(position) / std::pow(10000.0, pair / static_cast<double>(width));
    pe[static_cast<Eigen::Index>(i)] = static_cast<T>(i % 2 == 0 ? std::sin(angle) : std::cos(angle));
  }
  return pe;
}

namespace {

constexpr double kGeluCoeff = 0.044715;

template <typename T>
T gelu(T u) {
  const T c = static_cast<T>(std::sqrt(2.0 / std::numbers::pi));
  return T(0.5) * u * (T(1) + std::tanh(c * (u + T(kGeluCoeff) * u * u * u)));
}

template <typename T>
T gelu_grad(T u) {
  const T c = static_cast<T>(std::sqrt(2.0 / std::numbers::pi));
  const T t = std::tanh(c * (u + T(kGeluCoeff) * u * u * u));
  return T(0.5) * (T(1) + t) + T(0.5) * u * (T(1) - t * t) * c * (T(1) + T(3 * kGeluCoeff) * u * u);
}

// Row-wise RMS normalization: n = x * inv, inv_i = 1/sqrt(mean_j x_ij^2 + eps).
template <typename T>
void rms_forward(const Matrix<T>& x, T eps, Matrix<T>& n, Vector<T>& inv) {
  const auto width = static_cast<T>(x.cols());
  inv.resize(x.rows());
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    inv[i] = T(1) / std::sqrt(x.row(i).squaredNorm() / width + eps);
  }
  n = inv.asDiagonal() * x;
}

template <typename T>
Matrix<T> rms_backward(const Matrix<T>& n, const Vector<T>& inv, const Matrix<T>& dn) {
  const auto width = static_cast<T>(n.cols());
  Matrix<T> dx(n.rows(), n.cols());
  for (Eigen::Index i = 0; i < n.rows(); ++i) {
    const T m = n.row(i).dot(dn.row(i)) / width;
    dx.row(i) = inv[i] * (dn.row(i) - m * n.row(i));
  }
  return dx;
}

template <typename T>
Matrix<T> layer_forward(const LayerParams<T>& p, const ToyConfig& cfg, const Matrix<T>& x,
                        detail::LayerCache<T>& c) {
  const T eps = static_cast<T>(cfg.norm_epsilon);
  const auto s = x.rows();
  const auto dh = static_cast<Eigen::Index>(cfg.head_width());
  const T scale = T(1) / std::sqrt(static_cast<T>(dh));

  c.x = x;
  rms_forward(x, eps, c.n1, c.inv1);
  c.h1 = c.n1 * p.attn_gain.asDiagonal();
  c.q = c.h1 * p.query;
  c.k = c.h1 * p.key;
  c.v = c.h1 * p.value;
  c.o.setZero(s, x.cols());
  c.probs.assign(cfg.num_heads, Matrix<T>());
  for (std::size_t h = 0; h < cfg.num_heads; ++h) {
    const auto col = static_cast<Eigen::Index>(h) * dh;
    Matrix<T> scores = (c.q.middleCols(col, dh) * c.k.middleCols(col, dh).transpose()) * scale;
    Matrix<T>& prob = c.probs[h];
    prob.setZero(s, s);
    for (Eigen::Index i = 0; i < s; ++i) {
      const T peak = scores.row(i).head(i + 1).maxCoeff();
      T total = 0;
      for (Eigen::Index j = 0; j <= i; ++j) {
        prob(i, j) = std::exp(scores(i, j) - peak);
        total += prob(i, j);
      }
      prob.row(i).head(i + 1) /= total;
    }
    c.o.middleCols(col, dh) = prob * c.v.middleCols(col, dh);
  }
  c.x2 = x + c.o * p.output;
  rms_forward(c.x2, eps, c.n2, c.inv2);
  c.h2 = c.n2 * p.mlp_gain.asDiagonal();
  c.u = (c.h2 * p.mlp_in).rowwise() + p.mlp_in_bias.transpose();
  c.z = c.u.unaryExpr([](T v) { return gelu(v); });
  Matrix<T> out = c.x2 + c.z * p.mlp_out;
  out.rowwise() += p.mlp_out_bias.transpose();
  return out;
}

// Returns d(loss)/d(layer input) and accumulates parameter gradients.
template <typename T>
Matrix<T> layer_backward(const LayerParams<T>& p, const ToyConfig& cfg, const detail::LayerCache<T>& c,
                         const Matrix<T>& dout, LayerParams<T>& g) {
  const auto dh = static_cast<Eigen::Index>(cfg.head_width());
  const T scale = T(1) / std::sqrt(static_cast<T>(dh));

  // MLP branch
  g.mlp_out = c.z.transpose() * dout;
  g.mlp_out_bias = dout.colwise().sum().transpose();
  const Matrix<T> dz = dout * p.mlp_out.transpose();
  const Matrix<T> du = dz.cwiseProduct(c.u.unaryExpr([](T v) { return gelu_grad(v); }));
  g.mlp_in = c.h2.transpose() * du;
  g.mlp_in_bias = du.colwise().sum().transpose();
  const Matrix<T> dh2 = du * p.mlp_in.transpose();
  g.mlp_gain = dh2.cwiseProduct(c.n2).colwise().sum().transpose();
  Matrix<T> dx2 = dout + rms_backward(c.n2, c.inv2, Matrix<T>(dh2 * p.mlp_gain.asDiagonal()));

  // attention branch
  g.output = c.o.transpose() * dx2;
  const Matrix<T> d_o = dx2 * p.output.transpose();
  Matrix<T> dq = Matrix<T>::Zero(c.q.rows(), c.q.cols());
  Matrix<T> dk = Matrix<T>::Zero(c.k.rows(), c.k.cols());
  Matrix<T> dv = Matrix<T>::Zero(c.v.rows(), c.v.cols());
  for (std::size_t h = 0; h < cfg.num_heads; ++h) {
    const auto col = static_cast<Eigen::Index>(h) * dh;
    const Matrix<T>& prob = c.probs[h];
    const Matrix<T> dprob = d_o.middleCols(col, dh) * c.v.middleCols(col, dh).transpose();
    dv.middleCols(col, dh) = prob.transpose() * d_o.middleCols(col, dh);
    Matrix<T> dscore = prob.cwiseProduct(dprob);
    const Vector<T> row_dot = dscore.rowwise().sum();
    dscore -= row_dot.asDiagonal() * prob;
    dscore *= scale;
    dq.middleCols(col, dh) = dscore * c.k.middleCols(col, dh);
    dk.middleCols(col, dh) = dscore.transpose() * c.q.middleCols(col, dh);
  }
  g.query = c.h1.transpose() * dq;
  g.key = c.h1.transpose() * dk;
  g.value = c.h1.transpose() * dv;
  const Matrix<T> dh1 = dq * p.query.transpose() + dk * p.key.transpose() + dv * p.value.transpose();
  g.attn_gain = dh1.cwiseProduct(c.n1).colwise().sum().transpose();
  return dx2 + rms_backward(c.n1, c.inv1, Matrix<T>(dh1 * p.attn_gain.asDiagonal()));
}

template <typename T>
void check_inputs(const Parameters<T>& params, const ToyConfig& cfg, const ForwardInputs<T>& in,
                  const DropPlan* plan) {
  cfg.validate();
  require(params.layers.size() == cfg.num_layers, "forward: parameters have a different layer count");
  require(in.video.frames() >= 1 && in.video.slots() >= 1, "forward: need at least one video token");
  require(in.video.width() == cfg.model_width, "forward: video token width differs from model_width");
  require(in.question_tokens() >= 1, "forward: at least one question token is required");
  if (in.question_ids.empty()) {
    require(static_cast<std::size_t>(in.question.cols()) == cfg.model_width,
            "forward: question width differs from model_width");
  } else {
    for (auto id : in.question_ids) {
      require(id < cfg.vocab_size, "forward: question id " + std::to_string(id) + " outside the vocabulary");
    }
  }
  const std::size_t seq = in.video.frames() * in.video.slots() + in.question_tokens();
  require(seq <= cfg.max_sequence, "forward: sequence length exceeds max_sequence");
  if (plan != nullptr) {
    require(plan->initial_tokens() == in.video.slots(),
            "forward: plan built for " + std::to_string(plan->initial_tokens()) +
                " tokens per frame, input has " + std::to_string(in.video.slots()));
    require(plan->schedule().num_layers() == cfg.num_layers,
            "forward: plan built for " + std::to_string(plan->schedule().num_layers()) +
                " layers, model has " + std::to_string(cfg.num_layers));
  }
}

}  // namespace

template <typename T>
ForwardTrace<T> forward(const Parameters<T>& params, const ToyConfig& cfg, const ForwardInputs<T>& in,
                        const ForwardOptions<T>& options) {
  check_inputs(params, cfg, in, options.plan);
  const std::size_t frames = in.video.frames();
  const std::size_t n1 = in.video.slots();
  const std::size_t nq = in.question_tokens();
  const auto d = static_cast<Eigen::Index>(cfg.model_width);

  ForwardTrace<T> trace;
  trace.num_frames = frames;
  trace.question_tokens = nq;

  Matrix<T> x(static_cast<Eigen::Index>(frames * n1 + nq), d);
  std::vector<TokenOrigin> rows;
  rows.reserve(frames * n1 + nq);
  for (std::size_t f = 0; f < frames; ++f) {
    for (std::size_t s = 0; s < n1; ++s) {
      const auto r = static_cast<Eigen::Index>(rows.size());
      const auto tok = in.video.token(f, s);
      for (Eigen::Index w = 0; w < d; ++w) x(r, w) = tok[static_cast<std::size_t>(w)];
      rows.push_back({true, f, s, f * n1 + s});
    }
  }
  for (std::size_t j = 0; j < nq; ++j) {
    const auto r = static_cast<Eigen::Index>(rows.size());
    if (in.question_ids.empty()) {
      x.row(r) = in.question.row(static_cast<Eigen::Index>(j));
    } else {
      x.row(r) = params.embedding.row(static_cast<Eigen::Index>(in.question_ids[j]));
    }
    rows.push_back({false, 0, j, frames * n1 + j});
  }
  for (std::size_t r = 0; r < rows.size(); ++r) {
    x.row(static_cast<Eigen::Index>(r)) += position_encoding<T>(rows[r].position, cfg.model_width).transpose();
  }

  std::size_t per_frame = n1;
  trace.cache.resize(cfg.num_layers);
  for (std::size_t l = 0; l < cfg.num_layers; ++l) {
    trace.layer_inputs.push_back(x);
    trace.rows.push_back(rows);
    trace.video_tokens_per_frame.push_back(per_frame);
    trace.sequence_lengths.push_back(rows.size());

    auto& cache = trace.cache[l];
    Matrix<T> out = layer_forward(params.layers[l], cfg, x, cache);
    if (!out.allFinite()) throw NumericError("forward: non-finite activations after layer " + std::to_string(l));
    if (options.on_layer_output) options.on_layer_output(l, out, rows);
    if (options.record_attention) trace.attention.push_back(cache.probs);

    cache.kept_rows.clear();
    std::vector<TokenOrigin> next_rows;
    if (options.plan != nullptr && !options.plan->transition(l).identity()) {
      const auto& t = options.plan->transition(l);
      for (std::size_t f = 0; f < frames; ++f) {
        for (auto slot : t.kept) cache.kept_rows.push_back(f * per_frame + slot);
      }
      for (std::size_t j = 0; j < nq; ++j) cache.kept_rows.push_back(frames * per_frame + j);
      per_frame = t.n_next;
      Matrix<T> compact(static_cast<Eigen::Index>(cache.kept_rows.size()), d);
      for (std::size_t r = 0; r < cache.kept_rows.size(); ++r) {
        compact.row(static_cast<Eigen::Index>(r)) = out.row(static_cast<Eigen::Index>(cache.kept_rows[r]));
        next_rows.push_back(rows[cache.kept_rows[r]]);
      }
      x = std::move(compact);
    } else {
      for (std::size_t r = 0; r < rows.size(); ++r) cache.kept_rows.push_back(r);
      next_rows = rows;
      x = std::move(out);
    }
    rows = std::move(next_rows);
  }
  trace.layer_inputs.push_back(x);
  trace.rows.push_back(rows);
  trace.video_tokens_per_frame.push_back(per_frame);
  trace.sequence_lengths.push_back(rows.size());

  const Matrix<T> last = x.bottomRows(1);
  Matrix<T> normed;
  rms_forward(last, static_cast<T>(cfg.norm_epsilon), normed, trace.final_inv);
  trace.final_normed = normed.row(0).transpose();
  trace.final_state = trace.final_normed.cwiseProduct(params.final_gain);
  trace.output = params.head * trace.final_state;
  return trace;
}

namespace {

template <typename T>
T mse(const Vector<T>& output, const Vector<T>& target) {
  return (output - target).squaredNorm() / static_cast<T>(output.size());
}

}  // namespace

template <typename T>
T loss_only(const Parameters<T>& params, const ToyConfig& cfg, const ForwardInputs<T>& in,
            const Vector<T>& target, const DropPlan* plan, const ForwardOptions<T>& options) {
  ForwardOptions<T> opts = options;
  opts.plan = plan;
  const auto trace = forward(params, cfg, in, opts);
  require(static_cast<std::size_t>(target.size()) == cfg.output_width, "loss: target width differs from output_width");
  return mse(trace.output, target);
}

template <typename T>
LossAndGradients<T> loss_and_backward(const Parameters<T>& params, const ToyConfig& cfg,
                                      const ForwardInputs<T>& in, const Vector<T>& target, const DropPlan* plan) {
  ForwardOptions<T> opts;
  opts.plan = plan;
  const auto trace = forward(params, cfg, in, opts);
  require(static_cast<std::size_t>(target.size()) == cfg.output_width, "loss: target width differs from output_width");

  LossAndGradients<T> result;
  result.loss = mse(trace.output, target);
  if (!std::isfinite(result.loss)) throw NumericError("loss_and_backward: non-finite loss");
  auto& g = result.gradients;
  g = params.zeros_like();

  const Vector<T> dy = (trace.output - target) * (T(2) / static_cast<T>(target.size()));
  g.head = dy * trace.final_state.transpose();
  const Vector<T> dstate = params.head.transpose() * dy;
  g.final_gain = dstate.cwiseProduct(trace.final_normed);
  const Matrix<T> dnormed = dstate.cwiseProduct(params.final_gain).transpose();
  const Matrix<T> dlast = rms_backward(Matrix<T>(trace.final_normed.transpose()), trace.final_inv, dnormed);

  const auto d = static_cast<Eigen::Index>(cfg.model_width);
  Matrix<T> dx = Matrix<T>::Zero(trace.layer_inputs.back().rows(), d);
  dx.bottomRows(1) = dlast;
  for (std::size_t l = cfg.num_layers; l-- > 0;) {
    const auto& cache = trace.cache[l];
    Matrix<T> dout = Matrix<T>::Zero(cache.x.rows(), d);
    for (std::size_t r = 0; r < cache.kept_rows.size(); ++r) {
      dout.row(static_cast<Eigen::Index>(cache.kept_rows[r])) = dx.row(static_cast<Eigen::Index>(r));
    }
    dx = layer_backward(params.layers[l], cfg, cache, dout, g.layers[l]);
    if (!dx.allFinite()) throw NumericError("loss_and_backward: non-finite gradient at layer " + std::to_string(l));
  }
  if (!in.question_ids.empty()) {
    const std::size_t video_rows = in.video.frames() * in.video.slots();
    for (std::size_t j = 0; j < in.question_ids.size(); ++j) {
      g.embedding.row(static_cast<Eigen::Index>(in.question_ids[j])) +=
          dx.row(static_cast<Eigen::Index>(video_rows + j));
    }
  }
  return result;
}

template <typename T>
MemorizationTask<T> MemorizationTask<T>::make(const ToyConfig& cfg, std::size_t frames, std::size_t tokens_per_frame,
                                              std::size_t question_tokens, std::uint64_t seed) {
  cfg.validate();
  std::mt19937_64 rng(seed ^ 0x6d656d6f72697a65ULL);
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  MemorizationTask task;
  task.inputs.video = TokenTensor<T>(frames, tokens_per_frame, cfg.model_width);
  for (auto& v : task.inputs.video.data()) v = static_cast<T>(dist(rng));
  if (cfg.vocab_size > 0) {
    std::uniform_int_distribution<std::size_t> ids(0, cfg.vocab_size - 1);
    for (std::size_t j = 0; j < question_tokens; ++j) task.inputs.question_ids.push_back(ids(rng));
  } else {
    task.inputs.question.resize(static_cast<Eigen::Index>(question_tokens), static_cast<Eigen::Index>(cfg.model_width));
    for (Eigen::Index i = 0; i < task.inputs.question.size(); ++i) {
      task.inputs.question.data()[i] = static_cast<T>(dist(rng));
    }
  }
  task.target.resize(static_cast<Eigen::Index>(cfg.output_width));
  for (Eigen::Index i = 0; i < task.target.size(); ++i) task.target[i] = static_cast<T>(dist(rng));
  return task;
}

template <typename T>
TrainResult<T> train_steps(Parameters<T> params, const ToyConfig& cfg, const DropPlan* plan,
                           const MemorizationTask<T>& task, std::size_t steps, T learning_rate) {
  require(steps >= 1, "train_steps: steps must be >= 1");
  TrainResult<T> result;
  result.losses.reserve(steps);
  for (std::size_t step = 0; step < steps; ++step) {
    LossAndGradients<T> lg;
    try {
      lg = loss_and_backward(params, cfg, task.inputs, task.target, plan);
    } catch (const NumericError& e) {
      throw NumericError("train_steps: diverged at step " + std::to_string(step) + ": " + e.what());
    }
    result.losses.push_back(lg.loss);
    std::vector<std::span<T>> p, g;
    params.visit([&](const std::string&, std::span<T> s) { p.push_back(s); });
    lg.gradients.visit([&](const std::string&, std::span<T> s) { g.push_back(s); });
    for (std::size_t i = 0; i < p.size(); ++i) {
      for (std::size_t k = 0; k < p[i].size(); ++k) p[i][k] -= learning_rate * g[i][k];
    }
    if (!params.all_finite()) {
      throw NumericError("train_steps: parameters became non-finite at step " + std::to_string(step));
    }
  }
  result.params = std::move(params);
  return result;
}

template <typename T>
GradientCheckResult gradient_check(const Parameters<T>& params, const ToyConfig& cfg, const ForwardInputs<T>& in,
                                   const Vector<T>& target, const DropPlan* plan, double step, double floor) {
  require(step > 0.0 && floor > 0.0, "gradient_check: step and floor must be positive");
  const auto analytic = loss_and_backward(params, cfg, in, target, plan).gradients;
  std::vector<std::pair<std::string, std::span<const T>>> grads;
  analytic.visit([&](const std::string& name, std::span<const T> s) { grads.emplace_back(name, s); });

  Parameters<T> probe = params;
  std::vector<std::span<T>> slots;
  probe.visit([&](const std::string&, std::span<T> s) { slots.push_back(s); });

  GradientCheckResult result;
  const T h = static_cast<T>(step);
  for (std::size_t t = 0; t < slots.size(); ++t) {
    for (std::size_t i = 0; i < slots[t].size(); ++i) {
      const T saved = slots[t][i];
      slots[t][i] = saved + h;
      const double up = static_cast<double>(loss_only(probe, cfg, in, target, plan));
      slots[t][i] = saved - h;
      const double down = static_cast<double>(loss_only(probe, cfg, in, target, plan));
      slots[t][i] = saved;
      const double numeric = (up - down) / (2.0 * step);
      const double a = static_cast<double>(grads[t].second[i]);
      const double rel = std::abs(a - numeric) / std::max({std::abs(a), std::abs(numeric), floor});
      ++result.entries_checked;
      if (rel > result.max_relative_error) {
        result.max_relative_error = rel;
        result.worst_tensor = grads[t].first;
        result.worst_index = i;
      }
    }
  }
  return result;
}

#define VTC_TOY_INSTANTIATE(T)                                                                                     \
  template struct Parameters<T>;                                                                                   \
  template Parameters<T> init_params<T>(const ToyConfig&, std::uint64_t);                                         \
  template Vector<T> position_encoding<T>(std::size_t, std::size_t);                                              \
  template ForwardTrace<T> forward<T>(const Parameters<T>&, const ToyConfig&, const ForwardInputs<T>&,             \
                                      const ForwardOptions<T>&);                                                   \
  template T loss_only<T>(const Parameters<T>&, const ToyConfig&, const ForwardInputs<T>&, const Vector<T>&,      \
                          const DropPlan*, const ForwardOptions<T>&);                                              \
  template LossAndGradients<T> loss_and_backward<T>(const Parameters<T>&, const ToyConfig&,                       \
                                                    const ForwardInputs<T>&, const Vector<T>&, const DropPlan*);   \
  template struct MemorizationTask<T>;                                                                             \
  template TrainResult<T> train_steps<T>(Parameters<T>, const ToyConfig&, const DropPlan*,                        \
                                         const MemorizationTask<T>&, std::size_t, T);                  \
  template GradientCheckResult gradient_check<T>(const Parameters<T>&, const ToyConfig&, const ForwardInputs<T>&, \
                                                 const Vector<T>&, const DropPlan*, double, double);

VTC_TOY_INSTANTIATE(float)
VTC_TOY_INSTANTIATE(double)

#undef VTC_TOY_INSTANTIATE

}  // namespace vtc::toy
