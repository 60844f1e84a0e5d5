#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include "vtc/errors.hpp"

namespace vtc {

enum class ScheduleKind { kCosine, kStepwise, kConstant };

std::string_view to_string(ScheduleKind kind);
ScheduleKind parse_schedule_kind(std::string_view text);

/// One plateau of a step-wise schedule: `tokens` per frame from `start_layer` on.
struct Stage {
  std::size_t start_layer = 0;
  std::size_t tokens = 1;
  bool operator==(const Stage&) const = default;
};

/// Per-layer visual-token count per frame over layers 0..L.
///
/// Layer 0 is the input of the first transformer layer; tokens_at(l + 1) is
/// the count kept after layer l runs. So transformer layer i (1-based)
/// processes tokens_at(i - 1) tokens per frame, and tokens_at(L) is the
/// count leaving the last layer.
class CompressionSchedule {
 public:
  static CompressionSchedule cosine(std::size_t initial_tokens, std::size_t num_layers);
  static CompressionSchedule constant(std::size_t initial_tokens, std::size_t num_layers);
  /// Stages must start at layer 0 with `initial_tokens`, have strictly
  /// increasing start layers <= num_layers and non-increasing counts >= 1.
  static CompressionSchedule stepwise(std::size_t initial_tokens, std::size_t num_layers,
                                      std::vector<Stage> stages);

  ScheduleKind kind() const { return kind_; }
  std::size_t initial_tokens() const { return initial_tokens_; }
  std::size_t num_layers() const { return num_layers_; }
  const std::vector<Stage>& stages() const { return stages_; }

  std::size_t tokens_at(std::size_t layer) const;
  /// tokens_at(0..L), L + 1 entries.
  const std::vector<std::size_t>& counts() const { return counts_; }

  /// Mean per-frame count entering each layer: mean of tokens_at(0..L-1).
  double average_tokens_processed() const;

  std::string to_text() const;
  static CompressionSchedule from_text(std::string_view text);

  bool operator==(const CompressionSchedule& other) const {
    return kind_ == other.kind_ && initial_tokens_ == other.initial_tokens_ &&
           num_layers_ == other.num_layers_ && stages_ == other.stages_;
  }

 private:
  CompressionSchedule(ScheduleKind kind, std::size_t initial_tokens, std::size_t num_layers,
                      std::vector<Stage> stages);

  ScheduleKind kind_;
  std::size_t initial_tokens_;
  std::size_t num_layers_;
  std::vector<Stage> stages_;
  std::vector<std::size_t> counts_;
};

/// ceil((N1 - 1)/2 * cos(layer*pi/L) + (N1 + 1)/2), clamped to [1, N1].
std::size_t cosine_tokens(std::size_t initial_tokens, std::size_t num_layers, std::size_t layer);

/// Raised when no staircase reaches the requested average.
class ScheduleConstructionError : public Error {
 public:
  ScheduleConstructionError(const std::string& what, double best_average)
      : Error(what), best_average_(best_average) {}
  double best_average() const { return best_average_; }

 private:
  double best_average_;
};

inline constexpr std::size_t kDefaultStepwiseStages = 4;
inline constexpr double kStepwiseAverageTolerance = 0.5;

/// Staircase with exactly `num_stages` plateaus, first at `initial_tokens`,
/// last at 1, whose average_tokens_processed() lies within 0.5 of
/// `target_average`. Among feasible staircases the one closest to the target
/// is returned. Plateau counts are strictly decreasing whenever
/// initial_tokens >= num_stages.
CompressionSchedule build_stepwise_matching(std::size_t initial_tokens, std::size_t num_layers,
                                            std::size_t num_stages, double target_average);

}  // namespace vtc
