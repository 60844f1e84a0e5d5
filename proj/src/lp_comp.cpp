#include "vtc/lp_comp.hpp"

#include "vtc/kv_text.hpp"

namespace vtc {

std::string_view to_string(DropStrategy strategy) {
  return strategy == DropStrategy::kSuffix ? "suffix" : "uniform";
}

DropStrategy parse_drop_strategy(std::string_view text) {
  if (text == "suffix") return DropStrategy::kSuffix;
  if (text == "uniform") return DropStrategy::kUniform;
  throw ValidationError("unknown drop strategy '" + std::string(text) + "'");
}

namespace {

void check_counts(std::size_t n_prev, std::size_t n_next, const char* who) {
  require(n_next >= 1 && n_next <= n_prev, std::string(who) + ": need 1 <= n_next <= n_prev, got n_prev=" +
                                               std::to_string(n_prev) + " n_next=" + std::to_string(n_next));
}

}  // namespace

std::vector<std::size_t> suffix_keep_slots(std::size_t n_prev, std::size_t n_next) {
  check_counts(n_prev, n_next, "suffix_keep_slots");
  std::vector<std::size_t> kept(n_next);
  for (std::size_t j = 0; j < n_next; ++j) kept[j] = n_prev - n_next + j;
  return kept;
}

std::vector<std::size_t> uniform_keep_slots(std::size_t n_prev, std::size_t n_next) {
  check_counts(n_prev, n_next, "uniform_keep_slots");
  std::vector<std::size_t> kept(n_next);
  for (std::size_t j = 0; j < n_next; ++j) kept[j] = j * n_prev / n_next;
  return kept;
}

std::vector<std::size_t> Transition::dropped() const {
  std::vector<std::size_t> out;
  std::size_t k = 0;
  for (std::size_t s = 0; s < n_prev; ++s) {
    if (k < kept.size() && kept[k] == s) {
      ++k;
    } else {
      out.push_back(s);
    }
  }
  return out;
}

DropPlan::DropPlan(CompressionSchedule schedule, DropStrategy strategy)
    : schedule_(std::move(schedule)), strategy_(strategy) {
  const std::size_t layers = schedule_.num_layers();
  transitions_.reserve(layers);
  for (std::size_t l = 0; l < layers; ++l) {
    Transition t;
    t.layer = l;
    t.n_prev = schedule_.tokens_at(l);
    t.n_next = schedule_.tokens_at(l + 1);
    t.kept = strategy_ == DropStrategy::kSuffix ? suffix_keep_slots(t.n_prev, t.n_next)
                                                : uniform_keep_slots(t.n_prev, t.n_next);
    transitions_.push_back(std::move(t));
  }
}

const Transition& DropPlan::transition(std::size_t layer) const {
  require(layer < transitions_.size(), "DropPlan: transition layer out of range");
  return transitions_[layer];
}

std::vector<std::size_t> DropPlan::surviving_slots() const {
  std::vector<std::size_t> origin(initial_tokens());
  for (std::size_t s = 0; s < origin.size(); ++s) origin[s] = s;
  for (const auto& t : transitions_) {
    std::vector<std::size_t> next(t.kept.size());
    for (std::size_t j = 0; j < t.kept.size(); ++j) next[j] = origin[t.kept[j]];
    origin = std::move(next);
  }
  return origin;
}

std::string DropPlan::to_text() const {
  std::string text = schedule_.to_text();
  text += "strategy=" + std::string(to_string(strategy_)) + "\n";
  for (const auto& t : transitions_) {
    if (!t.identity()) text += "keep." + std::to_string(t.layer) + "=" + join_sizes(t.kept) + "\n";
  }
  return text;
}

DropPlan DropPlan::from_text(std::string_view text) {
  const auto kv = KeyValueText::parse(text);
  std::string schedule_text;
  std::string strategy = "suffix";
  std::vector<std::pair<std::size_t, std::vector<std::size_t>>> keeps;
  for (const auto& key : kv.keys()) {
    if (key == "strategy") {
      strategy = kv.get(key);
    } else if (key.rfind("keep.", 0) == 0) {
      keeps.emplace_back(parse_size(key.substr(5), key), parse_size_list(kv.get(key), key));
    } else {
      schedule_text += key + "=" + kv.get(key) + "\n";
    }
  }
  DropPlan plan(CompressionSchedule::from_text(schedule_text), parse_drop_strategy(strategy));
  for (const auto& [layer, kept] : keeps) {
    if (layer >= plan.transitions().size() || plan.transitions()[layer].kept != kept) {
      throw ValidationError("plan: keep." + std::to_string(layer) +
                            " disagrees with the schedule and strategy");
    }
  }
  return plan;
}

}  // namespace vtc
