#pragma once

#include <algorithm>
#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "vtc/schedule.hpp"
#include "vtc/token_tensor.hpp"

namespace vtc {

enum class DropStrategy { kSuffix, kUniform };

std::string_view to_string(DropStrategy strategy);
DropStrategy parse_drop_strategy(std::string_view text);

/// The last n_next slots: {n_prev - n_next, ..., n_prev - 1}.
std::vector<std::size_t> suffix_keep_slots(std::size_t n_prev, std::size_t n_next);

/// Evenly spaced slots {floor(j * n_prev / n_next) : j = 0..n_next-1}.
std::vector<std::size_t> uniform_keep_slots(std::size_t n_prev, std::size_t n_next);

/// Slot selection applied after transformer layer `layer`: each frame's
/// n_prev slots shrink to the n_next listed in `kept` (the same list for
/// every frame).
struct Transition {
  std::size_t layer = 0;
  std::size_t n_prev = 1;
  std::size_t n_next = 1;
  std::vector<std::size_t> kept;

  bool identity() const { return n_prev == n_next; }
  std::vector<std::size_t> dropped() const;
  bool operator==(const Transition&) const = default;
};

class DropPlan {
 public:
  DropPlan(CompressionSchedule schedule, DropStrategy strategy);

  const CompressionSchedule& schedule() const { return schedule_; }
  DropStrategy strategy() const { return strategy_; }
  /// One entry per layer 0..L-1; transition l maps tokens_at(l) to tokens_at(l + 1).
  const std::vector<Transition>& transitions() const { return transitions_; }
  const Transition& transition(std::size_t layer) const;

  std::size_t initial_tokens() const { return schedule_.initial_tokens(); }
  std::size_t final_tokens() const { return schedule_.tokens_at(schedule_.num_layers()); }

  /// Original slots that survive every transition, in order.
  std::vector<std::size_t> surviving_slots() const;

  /// Schedule block plus `strategy=` and one informational `keep.<layer>=`
  /// line per non-identity transition.
  std::string to_text() const;
  /// Rebuilds from the schedule and strategy; any `keep.*` lines must agree.
  static DropPlan from_text(std::string_view text);

 private:
  CompressionSchedule schedule_;
  DropStrategy strategy_;
  std::vector<Transition> transitions_;
};

inline DropPlan build_plan(const CompressionSchedule& schedule, DropStrategy strategy) {
  return DropPlan(schedule, strategy);
}

/// Copies kept slots of every frame: out[f][j] = in[f][kept[j]].
/// Throws PreconditionError when the tensor's slot count is not n_prev.
template <typename T>
TokenTensor<T> apply_drop(const TokenTensor<T>& tokens, const Transition& transition) {
  require(tokens.slots() == transition.n_prev,
          "apply_drop: tensor has " + std::to_string(tokens.slots()) + " slots per frame, transition expects " +
              std::to_string(transition.n_prev));
  if (transition.identity()) return tokens;
  TokenTensor<T> out(tokens.frames(), transition.n_next, tokens.width());
  for (std::size_t f = 0; f < tokens.frames(); ++f) {
    for (std::size_t j = 0; j < transition.kept.size(); ++j) {
      const auto src = tokens.token(f, transition.kept[j]);
      std::copy(src.begin(), src.end(), out.token(f, j).begin());
    }
  }
  return out;
}

/// Applies every transition of the plan in layer order.
template <typename T>
TokenTensor<T> apply_plan(const TokenTensor<T>& tokens, const DropPlan& plan) {
  TokenTensor<T> current = tokens;
  for (const auto& t : plan.transitions()) current = apply_drop(current, t);
  return current;
}

}  // namespace vtc
