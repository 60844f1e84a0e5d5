#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "vtc/toy/transformer.hpp"

using namespace vtc;
using namespace vtc::toy;

namespace {

ToyConfig small_config() {
  ToyConfig c;
  c.num_layers = 2;
  c.num_heads = 2;
  c.model_width = 8;
  c.mlp_width = 16;
  c.output_width = 3;
  return c;
}

DropPlan cosine_plan(std::size_t n1, std::size_t layers, DropStrategy s = DropStrategy::kSuffix) {
  return build_plan(CompressionSchedule::cosine(n1, layers), s);
}

}  // namespace

TEST_CASE("init is deterministic and seed dependent") {
  ToyConfig c = small_config();
  const auto a = init_params<double>(c, 1);
  const auto b = init_params<double>(c, 1);
  const auto other = init_params<double>(c, 2);
  CHECK(a == b);
  CHECK_FALSE(a == other);
  CHECK(a.layers[0].query.rows() == 8);
  CHECK(a.layers[0].query.cols() == 8);
  CHECK(a.all_finite());
  const double bound = 1.0 / std::sqrt(8.0);
  CHECK(a.layers[0].query.cwiseAbs().maxCoeff() <= bound);
  CHECK(a.layers[1].mlp_out.cwiseAbs().maxCoeff() <= 1.0 / std::sqrt(16.0));
}

TEST_CASE("config validation") {
  ToyConfig c = small_config();
  c.num_heads = 3;
  CHECK_THROWS_AS(c.validate(), PreconditionError);
  c = small_config();
  c.num_layers = 0;
  CHECK_THROWS_AS(c.validate(), PreconditionError);
}

TEST_CASE("no plan keeps the sequence length constant") {
  ToyConfig c = small_config();
  const auto p = init_params<double>(c, 3);
  const auto task = MemorizationTask<double>::make(c, 3, 4, 2, 5);
  const auto trace = forward(p, c, task.inputs);
  REQUIRE(trace.sequence_lengths.size() == c.num_layers + 1);
  for (auto s : trace.sequence_lengths) CHECK(s == 3 * 4 + 2);
}

TEST_CASE("cosine plan compression shape law") {
  ToyConfig c = small_config();
  c.num_layers = 4;
  const auto p = init_params<double>(c, 7);
  const auto task = MemorizationTask<double>::make(c, 2, 4, 3, 9);
  const auto plan = cosine_plan(4, 4);
  ForwardOptions<double> opts;
  opts.plan = &plan;
  const auto trace = forward(p, c, task.inputs, opts);
  std::vector<std::size_t> video_totals;
  for (std::size_t l = 0; l <= 4; ++l) {
    video_totals.push_back(trace.video_tokens_per_frame[l] * 2);
    CHECK(trace.sequence_lengths[l] == 2 * plan.schedule().tokens_at(l) + 3);
    std::size_t questions = 0;
    for (const auto& r : trace.rows[l]) questions += r.is_video ? 0 : 1;
    CHECK(questions == 3);
  }
  CHECK(video_totals == std::vector<std::size_t>{8, 8, 6, 4, 2});
}

TEST_CASE("surviving tokens keep their original positions") {
  ToyConfig c = small_config();
  const auto p = init_params<double>(c, 2);
  const auto task = MemorizationTask<double>::make(c, 3, 4, 2, 2);
  const auto plan = cosine_plan(4, 2);
  ForwardOptions<double> opts;
  opts.plan = &plan;
  const auto trace = forward(p, c, task.inputs, opts);
  for (const auto& rows : trace.rows) {
    for (std::size_t i = 0; i < rows.size(); ++i) {
      if (rows[i].is_video) {
        CHECK(rows[i].position == rows[i].frame * 4 + rows[i].slot);
      } else {
        CHECK(rows[i].position == 12 + rows[i].slot);
      }
      if (i > 0) CHECK(rows[i - 1].position < rows[i].position);
    }
  }
  // final layer: one token per frame, the last slot under suffix dropping
  for (std::size_t f = 0; f < 3; ++f) CHECK(trace.rows.back()[f].slot == 3);
}

TEST_CASE("plan mismatch is a contract violation") {
  ToyConfig c = small_config();
  const auto p = init_params<double>(c, 1);
  const auto task = MemorizationTask<double>::make(c, 2, 4, 1, 1);
  const auto wrong_tokens = cosine_plan(8, 2);
  const auto wrong_layers = cosine_plan(4, 3);
  ForwardOptions<double> opts;
  opts.plan = &wrong_tokens;
  CHECK_THROWS_AS(forward(p, c, task.inputs, opts), PreconditionError);
  opts.plan = &wrong_layers;
  CHECK_THROWS_AS(forward(p, c, task.inputs, opts), PreconditionError);
}

TEST_CASE("attention is causal and normalized") {
  ToyConfig c;  // default test dims
  const auto plan = cosine_plan(4, c.num_layers);
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto p = init_params<float>(c, seed);
    const auto task = MemorizationTask<float>::make(c, 3, 4, 2, seed + 100);
    ForwardOptions<float> opts;
    opts.plan = &plan;
    opts.record_attention = true;
    const auto trace = forward(p, c, task.inputs, opts);
    REQUIRE(trace.attention.size() == c.num_layers);
    for (std::size_t l = 0; l < c.num_layers; ++l) {
      REQUIRE(trace.attention[l].size() == c.num_heads);
      for (const auto& a : trace.attention[l]) {
        REQUIRE(static_cast<std::size_t>(a.rows()) == trace.sequence_lengths[l]);
        for (Eigen::Index i = 0; i < a.rows(); ++i) {
          CHECK(std::abs(a.row(i).sum() - 1.0f) <= 1e-5f);
          for (Eigen::Index j = i + 1; j < a.cols(); ++j) REQUIRE(a(i, j) == 0.0f);
        }
      }
    }
  }
}

TEST_CASE("64-bit rows normalize to 1e-12") {
  ToyConfig c;
  const auto p = init_params<double>(c, 4);
  const auto task = MemorizationTask<double>::make(c, 4, 4, 3, 4);
  ForwardOptions<double> opts;
  opts.record_attention = true;
  const auto trace = forward(p, c, task.inputs, opts);
  for (const auto& layer : trace.attention)
    for (const auto& a : layer)
      for (Eigen::Index i = 0; i < a.rows(); ++i) CHECK(std::abs(a.row(i).sum() - 1.0) <= 1e-12);
}

TEST_CASE("gradient check against central differences") {
  ToyConfig c = small_config();
  const auto plan = cosine_plan(4, 2);
  const auto p = init_params<double>(c, 11);
  const auto task = MemorizationTask<double>::make(c, 3, 4, 2, 12);
  const auto r = gradient_check(p, c, task.inputs, task.target, &plan, 1e-4);
  INFO("worst " << r.worst_tensor << "[" << r.worst_index << "]");
  CHECK(r.entries_checked == p.count());
  CHECK(r.max_relative_error <= 1e-4);
}

TEST_CASE("gradient check with question embeddings and uniform dropping") {
  ToyConfig c = small_config();
  c.vocab_size = 5;
  const auto plan = cosine_plan(4, 2, DropStrategy::kUniform);
  const auto p = init_params<double>(c, 21);
  const auto task = MemorizationTask<double>::make(c, 2, 4, 3, 22);
  const auto r = gradient_check(p, c, task.inputs, task.target, &plan, 1e-4);
  INFO("worst " << r.worst_tensor << "[" << r.worst_index << "]");
  CHECK(r.max_relative_error <= 1e-4);
}

TEST_CASE("zero head with zero target has zero loss and zero gradients") {
  ToyConfig c = small_config();
  c.vocab_size = 4;
  auto p = init_params<double>(c, 5);
  p.head.setZero();
  auto task = MemorizationTask<double>::make(c, 2, 4, 2, 6);
  task.target.setZero();
  const auto lg = loss_and_backward(p, c, task.inputs, task.target);
  CHECK(lg.loss == 0.0);
  lg.gradients.visit([](const std::string& name, std::span<const double> s) {
    for (double v : s) {
      INFO(name);
      REQUIRE(v == 0.0);
    }
  });
}

TEST_CASE("unused embedding rows receive zero gradient") {
  ToyConfig c = small_config();
  c.vocab_size = 6;
  const auto p = init_params<double>(c, 8);
  auto task = MemorizationTask<double>::make(c, 2, 4, 2, 9);
  task.inputs.question_ids = {1, 4};
  const auto lg = loss_and_backward(p, c, task.inputs, task.target);
  for (Eigen::Index row : {0, 2, 3, 5}) CHECK(lg.gradients.embedding.row(row).isZero(0.0));
  CHECK_FALSE(lg.gradients.embedding.row(4).isZero(0.0));
}

TEST_CASE("perturbing a dropped token leaves the loss unchanged") {
  ToyConfig c = small_config();
  c.num_layers = 4;
  const auto plan = cosine_plan(4, 4);  // suffix: 4,4,3,2,1
  const auto p = init_params<double>(c, 13);
  const auto task = MemorizationTask<double>::make(c, 3, 4, 2, 14);
  const double base = loss_only(p, c, task.inputs, task.target, &plan);

  for (std::size_t l = 0; l < c.num_layers; ++l) {
    const auto& t = plan.transition(l);
    if (t.identity()) continue;
    const auto dropped = t.dropped();
    auto perturb = [&](bool hit_dropped) {
      ForwardOptions<double> opts;
      opts.on_layer_output = [&](std::size_t layer, Matrix<double>& out, const std::vector<TokenOrigin>& rows) {
        if (layer != l) return;
        for (std::size_t r = 0; r < rows.size(); ++r) {
          if (!rows[r].is_video) continue;
          const std::size_t local = r % t.n_prev;
          const bool is_dropped = std::find(dropped.begin(), dropped.end(), local) != dropped.end();
          if (is_dropped == hit_dropped) out.row(static_cast<Eigen::Index>(r)).array() += 10.0;
        }
      };
      return loss_only(p, c, task.inputs, task.target, &plan, opts);
    };
    CHECK(perturb(true) == base);
    // nothing reads video rows after the last layer
    if (l + 1 < c.num_layers) CHECK(perturb(false) != base);
  }
}

TEST_CASE("training") {
  ToyConfig c;
  const auto plan = cosine_plan(4, c.num_layers);
  const auto p0 = init_params<double>(c, 31);
  const auto task = MemorizationTask<double>::make(c, 3, 4, 2, 32);

  SUBCASE("zero learning rate is a no-op") {
    const auto r = train_steps(p0, c, &plan, task, 5, 0.0);
    CHECK(r.params == p0);
    for (double l : r.losses) CHECK(l == r.losses.front());
  }
  SUBCASE("memorization lowers the loss") {
    const auto r = train_steps(p0, c, &plan, task, 200, 0.05);
    CHECK(r.losses.size() == 200);
    const double final_loss = loss_only(r.params, c, task.inputs, task.target, &plan);
    CHECK(final_loss < r.losses.front());
    CHECK(final_loss < 0.1 * r.losses.front());
  }
  SUBCASE("deterministic") {
    const auto a = train_steps(p0, c, &plan, task, 20, 0.05);
    const auto b = train_steps(p0, c, &plan, task, 20, 0.05);
    CHECK(a.losses == b.losses);
    CHECK(a.params == b.params);
  }
  SUBCASE("divergence names the step") {
    CHECK_THROWS_AS(train_steps(p0, c, &plan, task, 100, 1e30), NumericError);
  }
  SUBCASE("steps must be positive") {
    CHECK_THROWS_AS(train_steps(p0, c, &plan, task, 0, 0.1), PreconditionError);
  }
}
