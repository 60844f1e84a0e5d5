#include <doctest.h>

#include <algorithm>
#include <cstdint>
#include <map>
#include <random>

#include "qc_oracle.hpp"
#include "vtc/qc_comp.hpp"
#include "vtc/token_layout.hpp"
#include "vtc/toy/attention_source.hpp"

using namespace vtc;
using namespace vtc::testing;
using Starts = std::vector<std::size_t>;

namespace {

Starts starts_of(const std::vector<FrameSpan>& spans) {
  Starts s;
  for (const auto& x : spans) s.push_back(x.start);
  return s;
}

SegmentConfig seg(std::size_t w, std::size_t stride, std::size_t clip) {
  SegmentConfig c;
  c.window_frames = w;
  c.stride_frames = stride;
  c.clip_size = clip;
  return c;
}

FrameScoreTable table_of(std::vector<double> scores) {
  FrameScoreTable t;
  t.coverage.assign(scores.size(), 1);
  t.score = std::move(scores);
  return t;
}

}  // namespace

TEST_CASE("segment windows") {
  CHECK(segment_windows(64, seg(64, 32, 8)) == std::vector<FrameSpan>{{0, 64}});
  CHECK(starts_of(segment_windows(128, seg(64, 32, 8))) == Starts{0, 32, 64});
  CHECK(starts_of(segment_windows(100, seg(64, 32, 8))) == Starts{0, 32, 36});
  CHECK(segment_windows(10, seg(64, 32, 8)) == std::vector<FrameSpan>{{0, 10}});
  CHECK_THROWS_AS(segment_windows(10, seg(4, 5, 1)), PreconditionError);
  CHECK_THROWS_AS(segment_windows(0, seg(4, 2, 1)), PreconditionError);
}

TEST_CASE("segment windows cover every frame in order") {
  for (std::size_t T = 1; T <= 80; ++T)
    for (std::size_t w = 1; w <= 20; ++w)
      for (std::size_t s = 1; s <= w; ++s) {
        const auto win = segment_windows(T, seg(w, s, 1));
        for (std::size_t i = 1; i < win.size(); ++i) REQUIRE(win[i - 1].start < win[i].start);
        for (const auto& x : win) REQUIRE(x.end() <= T);
        const auto cover = span_coverage(T, win);
        REQUIRE(*std::min_element(cover.begin(), cover.end()) >= 1);
        REQUIRE(win == oracle_spans(T, w, s));
      }
}

TEST_CASE("chunk plan") {
  ChunkConfig c;
  CHECK(chunk_plan(512, c) == std::vector<FrameSpan>{{0, 512}});
  const auto two = chunk_plan(1024, c);
  CHECK(starts_of(two) == Starts{0, 256, 512});
  const auto cover = span_coverage(1024, two);
  for (std::size_t quarter = 0; quarter < 4; ++quarter) {
    const std::size_t expect[] = {1, 2, 2, 1};
    for (std::size_t f = quarter * 256; f < (quarter + 1) * 256; ++f) REQUIRE(cover[f] == expect[quarter]);
  }
  c.n_repeat = 8;
  const auto eight = chunk_plan(1024, c);
  Starts expect;
  for (std::size_t s = 0; s <= 512; s += 64) expect.push_back(s);
  CHECK(starts_of(eight) == expect);
  const auto cover8 = span_coverage(1024, eight);
  for (std::size_t f = 448; f < 576; ++f) CHECK(cover8[f] == 8);
  c.chunk_frames = 500;
  c.n_repeat = 3;
  CHECK_THROWS_AS(chunk_plan(1024, c), PreconditionError);
}

TEST_CASE("chunk plan final chunk ends at T and interior coverage is n_repeat") {
  for (std::size_t chunk : {8, 12, 16})
    for (std::size_t rep : {1, 2, 4})
      for (std::size_t T = 1; T <= 70; ++T) {
        ChunkConfig c;
        c.chunk_frames = chunk;
        c.n_repeat = rep;
        const auto plan = chunk_plan(T, c);
        REQUIRE(plan.back().end() == T);
        REQUIRE(plan == oracle_spans(T, chunk, chunk / rep));
        const auto cover = span_coverage(T, plan);
        for (std::size_t f = 0; f < T; ++f) {
          REQUIRE(cover[f] >= 1);
          if (T > chunk) REQUIRE(cover[f] <= rep + 1);
        }
        if (T >= 4 * chunk) {
          // frames well inside the grid (not near the clamped tail) see exactly n_repeat chunks
          for (std::size_t f = chunk; f + 2 * chunk < T; ++f) REQUIRE(cover[f] == rep);
        }
      }
}

TEST_CASE("score segment hand examples") {
  AttentionBlock b(1, 1, 2, 1, {2});
  const double row[] = {0.1, 0.2, 0.3, 0.4};
  for (std::size_t c = 0; c < 4; ++c) b.at(0, 0, 0, c) = row[c];
  const auto one = score_segment(b, {0, 2}, seg(64, 32, 1));
  CHECK(one.frame_score[0] == doctest::Approx(0.15).epsilon(1e-15));
  CHECK(one.frame_score[1] == doctest::Approx(0.35).epsilon(1e-15));
  const auto eight = score_segment(b, {0, 2}, seg(64, 32, 8));
  CHECK(eight.frame_score[0] == doctest::Approx(0.25).epsilon(1e-15));
  CHECK(eight.frame_score[1] == doctest::Approx(0.25).epsilon(1e-15));
  CHECK(eight.clip == std::vector<std::size_t>{0, 0});

  AttentionBlock uniform(2, 2, 5, 3, {2, 1});
  for (std::size_t l = 0; l < 2; ++l) std::fill(uniform.layer_data(l).begin(), uniform.layer_data(l).end(), l == 0 ? 0.1 : 0.2);
  const auto u = score_segment(uniform, {3, 5}, seg(64, 32, 2));
  for (double s : u.frame_score) CHECK(s == u.frame_score[0]);
}

TEST_CASE("clips follow absolute frame index") {
  AttentionBlock b(1, 1, 4, 1, {1});
  const double row[] = {0.1, 0.2, 0.3, 0.4};
  for (std::size_t c = 0; c < 4; ++c) b.at(0, 0, 0, c) = row[c];
  // frames 6..9 with clip 4: frames 6,7 in clip 1, frames 8,9 in clip 2
  const auto s = score_segment(b, {6, 4}, seg(64, 32, 4));
  CHECK(s.clip == std::vector<std::size_t>{1, 1, 2, 2});
  CHECK(s.frame_score[0] == doctest::Approx(0.15));
  CHECK(s.frame_score[3] == doctest::Approx(0.35));
}

TEST_CASE("global score examples") {
  AttentionBlock b(1, 1, 2, 1, {1});
  b.at(0, 0, 0, 0) = 0.4;
  b.at(0, 0, 0, 1) = 0.6;
  const auto t = global_score(b, seg(64, 32, 1));
  CHECK(t.score == std::vector<double>{0.4, 0.6});
  CHECK(t.coverage == std::vector<std::size_t>{1, 1});

  AttentionBlock swapped = b;
  swapped.at(0, 0, 0, 0) = 0.6;
  swapped.at(0, 0, 0, 1) = 0.4;
  auto a = global_score(swapped, seg(64, 32, 1)).score;
  auto c = t.score;
  std::sort(a.begin(), a.end());
  std::sort(c.begin(), c.end());
  CHECK(a == c);
}

TEST_CASE("scoring layer selection and validation") {
  AttentionBlock b(2, 1, 2, 1, {1, 1});
  b.at(0, 0, 0, 0) = 0.2;
  b.at(0, 0, 0, 1) = 0.8;
  b.at(1, 0, 0, 0) = 0.6;
  b.at(1, 0, 0, 1) = 0.4;
  auto cfg = seg(64, 32, 1);
  cfg.scoring_layers = {1};
  CHECK(score_segment(b, {0, 2}, cfg).frame_score == std::vector<double>{0.6, 0.4});
  cfg.scoring_layers = {};
  CHECK(score_segment(b, {0, 2}, cfg).frame_score[0] == doctest::Approx(0.4));
  cfg.scoring_layers = {2};
  CHECK_THROWS_AS(score_segment(b, {0, 2}, cfg), PreconditionError);
  CHECK_THROWS_AS(score_segment(b, {0, 3}, seg(64, 32, 1)), PreconditionError);

  b.at(0, 0, 0, 0) = 0.5;
  CHECK_THROWS_AS(b.validate(), ValidationError);
  b.at(0, 0, 0, 0) = -0.1;
  CHECK_THROWS_AS(b.validate(), ValidationError);
}

TEST_CASE("full-map extraction validates causality and normalization") {
  using M = Eigen::MatrixXd;
  // 2 frames x 1 token + 1 question token
  M a = M::Zero(3, 3);
  a(0, 0) = 1;
  a(1, 0) = 0.5;
  a(1, 1) = 0.5;
  a(2, 0) = 0.2;
  a(2, 1) = 0.3;
  a(2, 2) = 0.5;
  const auto b = extract_question_attention(std::vector<std::vector<M>>{{a}}, 2, {1}, 1);
  CHECK(b.at(0, 0, 0, 0) == 0.2);
  CHECK(b.at(0, 0, 0, 1) == 0.3);
  M acausal = a;
  acausal(0, 1) = 0.01;
  CHECK_THROWS_AS(extract_question_attention(std::vector<std::vector<M>>{{acausal}}, 2, {1}, 1), ValidationError);
  M unnormalized = a;
  unnormalized(2, 2) = 0.9;
  CHECK_THROWS_AS(extract_question_attention(std::vector<std::vector<M>>{{unnormalized}}, 2, {1}, 1),
                  ValidationError);
  CHECK_THROWS_AS(extract_question_attention(std::vector<std::vector<M>>{{a}}, 3, {1}, 1), ValidationError);
}

TEST_CASE("aggregate") {
  ObservationSet obs(3);
  obs.add(0, 0.2);
  obs.add(0, 0.4);
  obs.add(1, 0.7);
  obs.add(2, 0.1);
  obs.add(2, 0.3);
  obs.add(2, 0.5);
  const auto t = aggregate(obs);
  CHECK(t.score[0] == doctest::Approx(0.3));
  CHECK(t.score[1] == 0.7);
  CHECK(t.coverage == std::vector<std::size_t>{2, 1, 3});

  ObservationSet empty(2);
  empty.add(0, 0.5);
  CHECK_THROWS_AS(aggregate(empty), ValidationError);

  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> u(0, 1);
  std::vector<double> values(40);
  for (auto& v : values) v = u(rng);
  ObservationSet a(1), b(1);
  for (double v : values) a.add(0, v);
  std::shuffle(values.begin(), values.end(), rng);
  for (double v : values) b.add(0, v);
  CHECK(aggregate(a).score[0] == aggregate(b).score[0]);
}

TEST_CASE("select top k") {
  CHECK(select_top_k(table_of({0.1, 0.9, 0.5}), 2).frames == Starts{1, 2});
  CHECK(select_top_k(table_of({0.3, 0.3, 0.3}), 2).frames == Starts{0, 1});
  CHECK(select_top_k(table_of({0.3, 0.1, 0.2}), 5).frames == Starts{0, 1, 2});
  const auto r = select_top_k(table_of({0.1, 0.9, 0.5}), 2);
  CHECK(r.scores == std::vector<double>{0.9, 0.5});
  CHECK_THROWS_AS(select_top_k(table_of({0.1}), 0), PreconditionError);
  // clip granularity: clips {0,1} mean 0.2, {2,3} mean 0.6, {4} 0.5
  const auto clips = select_top_k(table_of({0.1, 0.3, 0.7, 0.5, 0.5}), 3, true, 2);
  CHECK(clips.frames == Starts{2, 3, 4});
}

TEST_CASE("top k is invariant under positive scaling") {
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> u(0, 1);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<double> s(20);
    for (auto& v : s) v = u(rng);
    std::vector<double> scaled = s;
    for (auto& v : scaled) v *= 3.5;
    CHECK(select_top_k(table_of(s), 5).frames == select_top_k(table_of(scaled), 5).frames);
  }
}

TEST_CASE("rank") {
  const auto t = table_of({0.5, 0.9, 0.5, 0.1});
  CHECK(rank_of(t, 1) == 1);
  CHECK(rank_of(t, 0) == 2);
  CHECK(rank_of(t, 2) == 2);
  CHECK(rank_of(t, 3) == 4);
}

TEST_CASE("fully attended frame is the strict maximum") {
  AttentionBlock b(2, 2, 6, 2, {3, 3});
  for (std::size_t l = 0; l < 2; ++l)
    for (std::size_t h = 0; h < 2; ++h)
      for (std::size_t q = 0; q < 2; ++q)
        for (std::size_t s = 0; s < 3; ++s) b.at(l, h, q, 4 * 3 + s) = 1.0 / 3.0;
  const auto t = global_score(b, seg(64, 32, 1));
  for (std::size_t f = 0; f < 6; ++f) {
    CHECK(t.score[f] >= 0.0);
    CHECK(t.score[f] <= 1.0);
    if (f != 4) CHECK(t.score[f] < t.score[4]);
  }
}

TEST_CASE("pipeline equals the brute-force oracle") {
  std::mt19937_64 rng(2024);
  auto pick = [&](std::size_t lo, std::size_t hi) { return std::uniform_int_distribution<std::size_t>(lo, hi)(rng); };
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t T = pick(1, 16);
    const std::size_t layers = pick(1, 3);
    std::vector<std::size_t> tpf(layers);
    for (auto& n : tpf) n = pick(1, 3);
    HashSource src(rng(), T, layers, pick(1, 2), pick(1, 3), tpf);
    ScoringPlan plan;
    plan.global = trial % 5 == 0;
    plan.segment = seg(pick(1, 18), 1, pick(1, 5));
    plan.segment.stride_frames = pick(1, plan.segment.window_frames);
    for (std::size_t l = 0; l < layers; ++l)
      if (pick(0, 1) == 1) plan.segment.scoring_layers.push_back(l);
    plan.chunk.n_repeat = pick(1, 3);
    plan.chunk.chunk_frames = plan.chunk.n_repeat * pick(1, 6);
    plan.threads = trial % 3;
    const auto table = score_video(src, plan);
    const auto expect = oracle_scores(src, plan);
    REQUIRE(table.size() == T);
    for (std::size_t f = 0; f < T; ++f) {
      INFO("trial " << trial << " frame " << f);
      CHECK(std::abs(table.score[f] - expect[f]) <= 1e-12);
      CHECK(table.coverage[f] >= 1);
      CHECK(table.score[f] >= 0.0);
      CHECK(table.score[f] <= 1.0);
    }
  }
}

TEST_CASE("single window equals global scoring") {
  HashSource src(5, 12, 2, 2, 2, {2, 1});
  ScoringPlan seg_plan;
  seg_plan.segment = seg(16, 8, 3);
  ScoringPlan glob = seg_plan;
  glob.global = true;
  CHECK(score_video(src, seg_plan).score == score_video(src, glob).score);
  CHECK(score_video(src, glob).score == global_score(src.attend({0, 12}), seg_plan.segment).score);
}

TEST_CASE("parallel scoring is bit-identical") {
  HashSource src(77, 300, 2, 2, 2, {2, 2});
  ScoringPlan plan;
  plan.segment = seg(32, 16, 8);
  plan.chunk.chunk_frames = 128;
  plan.chunk.n_repeat = 4;
  const auto serial = score_video(src, plan);
  for (std::size_t threads : {2, 4, 7}) {
    plan.threads = threads;
    const auto par = score_video(src, plan);
    CHECK(par.score == serial.score);
    CHECK(par.coverage == serial.coverage);
  }
}

TEST_CASE("monotonicity: dominating attention yields a higher score") {
  AttentionBlock b(1, 2, 4, 2, {2});
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0.0, 0.05);
  for (auto& v : b.layer_data(0)) v = u(rng);
  for (std::size_t h = 0; h < 2; ++h)
    for (std::size_t q = 0; q < 2; ++q)
      for (std::size_t s = 0; s < 2; ++s) b.at(0, h, q, 2 * 2 + s) = b.at(0, h, q, 0 * 2 + s) + 0.01;
  const auto t = global_score(b, seg(64, 32, 1));
  CHECK(t.score[2] >= t.score[0]);
}

TEST_CASE("toy model attention feeds the scorer") {
  toy::ToyConfig cfg;
  const auto params = toy::init_params<float>(cfg, 3);
  const auto task = toy::MemorizationTask<float>::make(cfg, 10, 4, 2, 4);
  const auto plan = build_plan(CompressionSchedule::cosine(4, cfg.num_layers), DropStrategy::kSuffix);
  toy::ToyAttentionSource<float> src(params, cfg, task.inputs, &plan);
  const auto block = src.attend({2, 5});
  CHECK(block.frames() == 5);
  CHECK(block.tokens_per_frame() == std::vector<std::size_t>{4, 4, 3, 2});
  ScoringPlan sp;
  sp.segment = seg(4, 2, 2);
  const auto table = score_video(src, sp);
  CHECK(table.size() == 10);
  for (std::size_t f = 0; f < 10; ++f) {
    CHECK(table.coverage[f] >= 1);
    CHECK(table.score[f] > 0.0);
    CHECK(table.score[f] <= 1.0);
  }
}
