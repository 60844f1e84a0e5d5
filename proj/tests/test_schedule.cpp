#include <doctest.h>

#include <cmath>
#include <numbers>
#include <vector>

#include "vtc/schedule.hpp"

using namespace vtc;

namespace {

// Independent evaluation of the cosine rule in long double.
std::size_t cosine_oracle(std::size_t n1, std::size_t layers, std::size_t layer) {
  const long double v = (static_cast<long double>(n1) - 1) / 2 *
                            std::cos(std::numbers::pi_v<long double> * layer / layers) +
                        (static_cast<long double>(n1) + 1) / 2;
  const long double r = std::round(v);
  return static_cast<std::size_t>(std::fabs(v - r) < 1e-12L ? r : std::ceil(v));
}

}  // namespace

TEST_CASE("cosine spot values") {
  const auto s = CompressionSchedule::cosine(16, 28);
  CHECK(s.tokens_at(0) == 16);
  CHECK(s.tokens_at(7) == 14);
  CHECK(s.tokens_at(14) == 9);
  CHECK(s.tokens_at(21) == 4);
  CHECK(s.tokens_at(28) == 1);
  CHECK_THROWS_AS(s.tokens_at(29), PreconditionError);
}

TEST_CASE("cosine N1=4 L=4") {
  const auto s = CompressionSchedule::cosine(4, 4);
  CHECK(s.counts() == std::vector<std::size_t>{4, 4, 3, 2, 1});
}

TEST_CASE("cosine matches an independent evaluation") {
  for (std::size_t n1 = 1; n1 <= 64; ++n1) {
    for (std::size_t layers = 1; layers <= 64; ++layers) {
      const auto s = CompressionSchedule::cosine(n1, layers);
      for (std::size_t l = 0; l <= layers; ++l) {
        REQUIRE(s.tokens_at(l) == cosine_oracle(n1, layers, l));
      }
    }
  }
}

TEST_CASE("endpoint identities and monotonicity") {
  for (std::size_t n1 = 1; n1 <= 64; ++n1) {
    for (std::size_t layers = 1; layers <= 64; ++layers) {
      const auto s = CompressionSchedule::cosine(n1, layers);
      REQUIRE(s.tokens_at(0) == n1);
      REQUIRE(s.tokens_at(layers) == 1);
      for (std::size_t l = 0; l < layers; ++l) {
        REQUIRE(s.tokens_at(l + 1) <= s.tokens_at(l));
        REQUIRE(s.tokens_at(l) >= 1);
      }
    }
  }
}

TEST_CASE("per-layer drop bound") {
  for (std::size_t n1 = 1; n1 <= 64; ++n1) {
    for (std::size_t layers = n1; layers <= 64; ++layers) {
      const auto s = CompressionSchedule::cosine(n1, layers);
      const auto bound = static_cast<std::size_t>(
                             std::ceil(std::numbers::pi * static_cast<double>(n1 - 1) / (2.0 * layers))) +
                         1;
      for (std::size_t l = 0; l < layers; ++l) REQUIRE(s.tokens_at(l) - s.tokens_at(l + 1) <= bound);
    }
  }
  // default parameters: brute-force maximum per-layer drop
  const auto s = CompressionSchedule::cosine(16, 28);
  std::size_t max_drop = 0;
  for (std::size_t l = 0; l < 28; ++l) max_drop = std::max(max_drop, s.tokens_at(l) - s.tokens_at(l + 1));
  CHECK(max_drop == 1);
}

TEST_CASE("constant and stepwise families") {
  const auto c = CompressionSchedule::constant(16, 28);
  for (std::size_t l = 0; l <= 28; ++l) CHECK(c.tokens_at(l) == 16);
  CHECK(c.average_tokens_processed() == 16.0);

  const auto st = CompressionSchedule::stepwise(16, 8, {{0, 16}, {3, 8}, {6, 1}});
  CHECK(st.counts() == std::vector<std::size_t>{16, 16, 16, 8, 8, 8, 1, 1, 1});
  CHECK_THROWS_AS(CompressionSchedule::stepwise(16, 8, {{0, 8}}), PreconditionError);
  CHECK_THROWS_AS(CompressionSchedule::stepwise(16, 8, {{0, 16}, {3, 17}}), PreconditionError);
  CHECK_THROWS_AS(CompressionSchedule::stepwise(16, 8, {{0, 16}, {3, 8}, {3, 4}}), PreconditionError);
  CHECK_THROWS_AS(CompressionSchedule::cosine(16, 0), PreconditionError);
}

TEST_CASE("average tokens processed") {
  CHECK(CompressionSchedule::cosine(1, 4).average_tokens_processed() == 1.0);
  // direct summation of the 28 ceilinged layer-input counts
  std::size_t sum = 0;
  for (std::size_t l = 0; l < 28; ++l) sum += cosine_oracle(16, 28, l);
  CHECK(sum == 259);
  const double avg = CompressionSchedule::cosine(16, 28).average_tokens_processed();
  CHECK(avg == doctest::Approx(259.0 / 28.0).epsilon(1e-15));
  CHECK(avg > 8.5);
  CHECK(avg < 9.5);
}

TEST_CASE("stepwise matching: two plateaus against the cosine average") {
  const double target = CompressionSchedule::cosine(16, 28).average_tokens_processed();
  // exhaustive search over the 27 interior switch layers
  std::size_t best_switch = 0;
  double best_gap = 1e9;
  for (std::size_t s = 1; s <= 27; ++s) {
    const double avg = (16.0 * s + (28.0 - s)) / 28.0;
    if (std::abs(avg - target) < best_gap) {
      best_gap = std::abs(avg - target);
      best_switch = s;
    }
  }
  CHECK(best_switch == 15);

  const auto st = build_stepwise_matching(16, 28, 2, target);
  REQUIRE(st.stages().size() == 2);
  CHECK(st.stages()[0] == Stage{0, 16});
  CHECK(st.stages()[1] == Stage{best_switch, 1});
  CHECK(std::abs(st.average_tokens_processed() - target) <= 0.5);
  CHECK(st.average_tokens_processed() == doctest::Approx(253.0 / 28.0));
}

TEST_CASE("stepwise matching: four stages") {
  const auto st = build_stepwise_matching(16, 4, 4, 8.5);
  REQUIRE(st.stages().size() == 4);
  CHECK(st.tokens_at(0) == 16);
  CHECK(st.tokens_at(4) == 1);
  // each of the four layers runs on its own plateau; 16 + a + b + 1 = 34
  CHECK(st.tokens_at(1) + st.tokens_at(2) == 17);
  CHECK(st.tokens_at(1) > st.tokens_at(2));
  CHECK(st.tokens_at(2) > 1);
  CHECK(std::abs(st.average_tokens_processed() - 8.5) <= 0.5);

  const auto dflt = build_stepwise_matching(16, 28, kDefaultStepwiseStages,
                                            CompressionSchedule::cosine(16, 28).average_tokens_processed());
  CHECK(dflt.stages().size() == 4);
  CHECK(std::abs(dflt.average_tokens_processed() - 259.0 / 28.0) <= 0.5);
  for (std::size_t l = 0; l < 28; ++l) CHECK(dflt.tokens_at(l + 1) <= dflt.tokens_at(l));
}

TEST_CASE("stepwise matching: floor case and infeasible targets") {
  const auto st = build_stepwise_matching(1, 8, 2, 1.0);
  CHECK(st.stages().size() == 2);
  for (std::size_t l = 0; l <= 8; ++l) CHECK(st.tokens_at(l) == 1);

  // 16 then 1 over two layers can only average 8.5.
  try {
    build_stepwise_matching(16, 2, 2, 15.5);
    FAIL("expected ScheduleConstructionError");
  } catch (const ScheduleConstructionError& e) {
    CHECK(e.best_average() == 8.5);
  }
}

TEST_CASE("stepwise matching always meets its tolerance") {
  for (std::size_t n1 = 2; n1 <= 16; ++n1) {
    for (std::size_t layers = 4; layers <= 20; layers += 4) {
      for (std::size_t stages = 2; stages <= 4; ++stages) {
        const double target = CompressionSchedule::cosine(n1, layers).average_tokens_processed();
        try {
          const auto st = build_stepwise_matching(n1, layers, stages, target);
          CHECK(st.stages().size() == stages);
          CHECK(std::abs(st.average_tokens_processed() - target) <= 0.5);
          CHECK(st.tokens_at(layers) == 1);
        } catch (const ScheduleConstructionError& e) {
          CHECK(std::abs(e.best_average() - target) > 0.5);
        }
      }
    }
  }
}

TEST_CASE("schedule text round trip") {
  for (const auto& s : {CompressionSchedule::cosine(16, 28), CompressionSchedule::constant(4, 3),
                        CompressionSchedule::stepwise(16, 8, {{0, 16}, {3, 8}, {6, 1}})}) {
    const auto back = CompressionSchedule::from_text(s.to_text());
    CHECK(back == s);
    CHECK(back.counts() == s.counts());
  }
  CHECK(CompressionSchedule::cosine(16, 28).to_text() == "kind=cosine\ninitial_tokens=16\nnum_layers=28\n");
  CHECK_THROWS_AS(CompressionSchedule::from_text("kind=cosine\ninitial_tokens=16\nnum_layers=28\nfoo=1\n"),
                  ValidationError);
  CHECK_THROWS_AS(CompressionSchedule::from_text("kind=cosine\ninitial_tokens=16\nnum_layers=0\n"),
                  ValidationError);
  CHECK_THROWS_AS(CompressionSchedule::from_text("kind=spiral\ninitial_tokens=16\nnum_layers=2\n"),
                  ValidationError);
}
