#include "vtc/schedule.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <sstream>

#include "vtc/kv_text.hpp"

namespace vtc {

std::string_view to_string(ScheduleKind kind) {
  switch (kind) {
    case ScheduleKind::kCosine: return "cosine";
    case ScheduleKind::kStepwise: return "stepwise";
    case ScheduleKind::kConstant: return "constant";
  }
  return "unknown";
}

ScheduleKind parse_schedule_kind(std::string_view text) {
  if (text == "cosine") return ScheduleKind::kCosine;
  if (text == "stepwise") return ScheduleKind::kStepwise;
  if (text == "constant") return ScheduleKind::kConstant;
  throw ValidationError("unknown schedule kind '" + std::string(text) + "'");
}

std::size_t cosine_tokens(std::size_t initial_tokens, std::size_t num_layers, std::size_t layer) {
  require(initial_tokens >= 1, "cosine schedule: initial_tokens must be >= 1");
  require(num_layers >= 1, "cosine schedule: num_layers must be >= 1");
  require(layer <= num_layers, "cosine schedule: layer " + std::to_string(layer) +
                                   " outside [0, " + std::to_string(num_layers) + "]");
  const double n1 = static_cast<double>(initial_tokens);
  const double angle = std::numbers::pi * static_cast<double>(layer) / static_cast<double>(num_layers);
  const double value = (n1 - 1.0) / 2.0 * std::cos(angle) + (n1 + 1.0) / 2.0;
  // cos() is off by an ulp at angles like pi/3; do not let that bump an
  // exact integer to the next count.
  const double nearest = std::round(value);
  const double rounded = std::abs(value - nearest) < 1e-9 ? nearest : std::ceil(value);
  if (rounded < 1.0) return 1;
  if (rounded > n1) return initial_tokens;
  return static_cast<std::size_t>(rounded);
}

CompressionSchedule::CompressionSchedule(ScheduleKind kind, std::size_t initial_tokens,
                                         std::size_t num_layers, std::vector<Stage> stages)
    : kind_(kind), initial_tokens_(initial_tokens), num_layers_(num_layers), stages_(std::move(stages)) {
  counts_.resize(num_layers_ + 1);
  for (std::size_t l = 0; l <= num_layers_; ++l) {
    switch (kind_) {
      case ScheduleKind::kCosine: counts_[l] = cosine_tokens(initial_tokens_, num_layers_, l); break;
      case ScheduleKind::kConstant: counts_[l] = initial_tokens_; break;
      case ScheduleKind::kStepwise: {
        std::size_t tokens = stages_.front().tokens;
        for (const auto& s : stages_) {
          if (s.start_layer <= l) tokens = s.tokens;
        }
        counts_[l] = tokens;
        break;
      }
    }
  }
}

CompressionSchedule CompressionSchedule::cosine(std::size_t initial_tokens, std::size_t num_layers) {
  require(initial_tokens >= 1, "schedule: initial_tokens must be >= 1");
  require(num_layers >= 1, "schedule: num_layers must be >= 1");
  return {ScheduleKind::kCosine, initial_tokens, num_layers, {}};
}

CompressionSchedule CompressionSchedule::constant(std::size_t initial_tokens, std::size_t num_layers) {
  require(initial_tokens >= 1, "schedule: initial_tokens must be >= 1");
  require(num_layers >= 1, "schedule: num_layers must be >= 1");
  return {ScheduleKind::kConstant, initial_tokens, num_layers, {}};
}

CompressionSchedule CompressionSchedule::stepwise(std::size_t initial_tokens, std::size_t num_layers,
                                                  std::vector<Stage> stages) {
  require(initial_tokens >= 1, "schedule: initial_tokens must be >= 1");
  require(num_layers >= 1, "schedule: num_layers must be >= 1");
  require(!stages.empty(), "stepwise schedule: at least one stage required");
  require(stages.front().start_layer == 0 && stages.front().tokens == initial_tokens,
          "stepwise schedule: first stage must be (0, initial_tokens)");
  for (std::size_t i = 0; i < stages.size(); ++i) {
    const auto& s = stages[i];
    require(s.tokens >= 1 && s.tokens <= initial_tokens,
            "stepwise schedule: stage count outside [1, initial_tokens]");
    require(s.start_layer <= num_layers, "stepwise schedule: stage starts past the last layer");
    if (i > 0) {
      require(s.start_layer > stages[i - 1].start_layer,
              "stepwise schedule: stage start layers must strictly increase");
      require(s.tokens <= stages[i - 1].tokens, "stepwise schedule: stage counts must not increase");
    }
  }
  return {ScheduleKind::kStepwise, initial_tokens, num_layers, std::move(stages)};
}

std::size_t CompressionSchedule::tokens_at(std::size_t layer) const {
  require(layer <= num_layers_, "tokens_at: layer " + std::to_string(layer) + " outside [0, " +
                                    std::to_string(num_layers_) + "]");
  return counts_[layer];
}

double CompressionSchedule::average_tokens_processed() const {
  std::size_t sum = 0;
  for (std::size_t l = 0; l < num_layers_; ++l) sum += counts_[l];
  return static_cast<double>(sum) / static_cast<double>(num_layers_);
}

std::string CompressionSchedule::to_text() const {
  KeyValueText kv;
  kv.set("kind", std::string(to_string(kind_)));
  kv.set("initial_tokens", std::to_string(initial_tokens_));
  kv.set("num_layers", std::to_string(num_layers_));
  if (kind_ == ScheduleKind::kStepwise) {
    std::string stages;
    for (std::size_t i = 0; i < stages_.size(); ++i) {
      if (i) stages += ',';
      stages += std::to_string(stages_[i].start_layer) + ':' + std::to_string(stages_[i].tokens);
    }
    kv.set("stages", stages);
  }
  return kv.to_text();
}

namespace {

std::vector<Stage> parse_stages(const std::string& text) {
  std::vector<Stage> stages;
  std::string_view rest = text;
  while (!rest.empty()) {
    const auto comma = rest.find(',');
    const std::string_view item = rest.substr(0, comma);
    const auto colon = item.find(':');
    if (colon == std::string_view::npos) {
      throw ValidationError("stages: expected start:count, got '" + std::string(item) + "'");
    }
    stages.push_back({parse_size(item.substr(0, colon), "stage start"),
                      parse_size(item.substr(colon + 1), "stage count")});
    if (comma == std::string_view::npos) break;
    rest = rest.substr(comma + 1);
  }
  return stages;
}

}  // namespace

CompressionSchedule CompressionSchedule::from_text(std::string_view text) {
  const auto kv = KeyValueText::parse(text);
  kv.reject_unknown({"kind", "initial_tokens", "num_layers", "stages"});
  const auto kind = parse_schedule_kind(kv.get("kind"));
  const auto n1 = kv.get_size("initial_tokens");
  const auto layers = kv.get_size("num_layers");
  try {
    switch (kind) {
      case ScheduleKind::kCosine: return cosine(n1, layers);
      case ScheduleKind::kConstant: return constant(n1, layers);
      case ScheduleKind::kStepwise: return stepwise(n1, layers, parse_stages(kv.get("stages")));
    }
  } catch (const PreconditionError& e) {
    throw ValidationError(e.what());
  }
  throw ValidationError("unreachable schedule kind");
}

// Dynamic program over processed layers 0..L-1. State (layer, stage, count)
// carries the bitset of reachable partial sums of per-layer counts; the
// average of a staircase is its total over L.
CompressionSchedule build_stepwise_matching(std::size_t initial_tokens, std::size_t num_layers,
                                            std::size_t num_stages, double target_average) {
  require(num_stages >= 2, "build_stepwise_matching: num_stages must be >= 2");
  require(num_layers >= num_stages, "build_stepwise_matching: need at least one layer per stage");
  require(initial_tokens >= 1, "build_stepwise_matching: initial_tokens must be >= 1");
  require(target_average >= 1.0 && target_average <= static_cast<double>(initial_tokens),
          "build_stepwise_matching: target average outside [1, initial_tokens]");

  const std::size_t n1 = initial_tokens;
  const std::size_t layers = num_layers;
  const std::size_t stages = num_stages;
  const bool strict = n1 >= stages;
  const std::size_t max_sum = n1 * layers;
  const std::size_t words = max_sum / 64 + 1;

  auto index = [&](std::size_t l, std::size_t j, std::size_t c) { return ((l * stages) + j) * (n1 + 1) + c; };
  std::vector<std::uint64_t> bits(layers * stages * (n1 + 1) * words, 0);
  auto word_ptr = [&](std::size_t state) { return bits.data() + state * words; };
  auto test = [&](std::size_t state, std::size_t sum) {
    return (word_ptr(state)[sum / 64] >> (sum % 64)) & 1U;
  };
  // dst |= src << shift
  auto or_shifted = [&](std::size_t dst, std::size_t src, std::size_t shift) {
    std::uint64_t* d = word_ptr(dst);
    const std::uint64_t* s = word_ptr(src);
    const std::size_t ws = shift / 64;
    const std::size_t bs = shift % 64;
    for (std::size_t w = words; w-- > ws;) {
      std::uint64_t v = s[w - ws] << bs;
      if (bs != 0 && w > ws) v |= s[w - ws - 1] >> (64 - bs);
      d[w] |= v;
    }
  };

  word_ptr(index(0, 0, n1))[n1 / 64] |= std::uint64_t{1} << (n1 % 64);
  for (std::size_t l = 1; l < layers; ++l) {
    for (std::size_t j = 0; j < stages && j <= l; ++j) {
      for (std::size_t c = 1; c <= n1; ++c) {
        const std::size_t dst = index(l, j, c);
        // same plateau continues
        or_shifted(dst, index(l - 1, j, c), c);
        if (j == 0) continue;
        // a new plateau begins at layer l
        for (std::size_t prev = c + (strict ? 1 : 0); prev <= n1; ++prev) {
          or_shifted(dst, index(l - 1, j - 1, prev), c);
        }
      }
    }
  }

  const std::size_t final_state = index(layers - 1, stages - 1, 1);
  const double target_sum = target_average * static_cast<double>(layers);
  std::size_t best_sum = 0;
  double best_gap = std::numeric_limits<double>::infinity();
  for (std::size_t sum = 0; sum <= max_sum; ++sum) {
    if (!test(final_state, sum)) continue;
    const double gap = std::abs(static_cast<double>(sum) - target_sum);
    if (gap < best_gap) {
      best_gap = gap;
      best_sum = sum;
    }
  }
  const double best_average = static_cast<double>(best_sum) / static_cast<double>(layers);
  if (!std::isfinite(best_gap) ||
      std::abs(best_average - target_average) > kStepwiseAverageTolerance) {
    std::ostringstream msg;
    msg << "no " << stages << "-stage staircase from " << n1 << " over " << layers
        << " layers averages within " << kStepwiseAverageTolerance << " of " << target_average;
    if (std::isfinite(best_gap)) msg << "; best achievable average is " << best_average;
    throw ScheduleConstructionError(msg.str(), std::isfinite(best_gap) ? best_average : 0.0);
  }

  // Walk back from the last layer, preferring to extend the current plateau.
  std::vector<std::size_t> per_layer(layers);
  std::vector<std::size_t> stage_of(layers);
  std::size_t j = stages - 1;
  std::size_t c = 1;
  std::size_t sum = best_sum;
  for (std::size_t l = layers - 1; l > 0; --l) {
    per_layer[l] = c;
    stage_of[l] = j;
    const std::size_t rest = sum - c;
    sum = rest;
    if (test(index(l - 1, j, c), rest)) continue;
    bool found = false;
    for (std::size_t prev = c + (strict ? 1 : 0); j > 0 && prev <= n1 && !found; ++prev) {
      if (test(index(l - 1, j - 1, prev), rest)) {
        --j;
        c = prev;
        found = true;
      }
    }
    if (!found) throw NumericError("build_stepwise_matching: inconsistent reconstruction");
  }
  per_layer[0] = c;
  stage_of[0] = j;

  std::vector<Stage> plateaus{{0, per_layer[0]}};
  for (std::size_t l = 1; l < layers; ++l) {
    if (stage_of[l] != stage_of[l - 1]) plateaus.push_back({l, per_layer[l]});
  }
  return CompressionSchedule::stepwise(n1, layers, std::move(plateaus));
}

}  // namespace vtc
