#include "vtc/reports.hpp"

#include <fmt/format.h>

#include <algorithm>

#include "vtc/kv_text.hpp"

namespace vtc {

std::string schedule_csv(const CompressionSchedule& schedule) {
  std::string out = "layer,tokens_per_frame\n";
  for (std::size_t l = 0; l <= schedule.num_layers(); ++l) out += fmt::format("{},{}\n", l, schedule.tokens_at(l));
  return out;
}

std::string score_csv(const FrameScoreTable& table, const SelectionResult& selection) {
  std::string out = "frame,score,coverage,selected\n";
  for (std::size_t f = 0; f < table.size(); ++f) {
    const bool sel = std::binary_search(selection.frames.begin(), selection.frames.end(), f);
    out += fmt::format("{},{},{},{}\n", f, table.score[f], table.coverage[f], sel ? 1 : 0);
  }
  return out;
}

std::string selection_csv(const SelectionResult& selection) {
  std::string out = "frame,score\n";
  for (std::size_t i = 0; i < selection.frames.size(); ++i) {
    out += fmt::format("{},{}\n", selection.frames[i], selection.scores[i]);
  }
  return out;
}

std::string bias_csv(const std::vector<BiasReportRow>& rows) {
  std::string out =
      "fixture,seed,total_frames,needle_frame,needle_signal,begin_bias,end_bias,global_rank,segmented_rank\n";
  for (const auto& r : rows) {
    const auto& c = r.config;
    out += fmt::format("{},{},{},{},{},{},{},{},{}\n", r.name, c.seed, c.total_frames, c.needle_frame,
                       c.needle_signal, c.begin_bias, c.end_bias, r.global_rank, r.segmented_rank);
  }
  return out;
}

std::string niah_csv(const std::vector<NiahReportRow>& rows) {
  std::string out = "seed,total_frames,hops,signal,recovered,hop_frames,selected,ranks\n";
  auto join = [](const std::vector<std::size_t>& v) { return join_sizes(v, ';'); };
  for (const auto& r : rows) {
    const auto& inst = r.instance;
    out += fmt::format("{},{},{},{},{},{},{},{}\n", inst.seed, inst.total_frames, inst.hops(), r.signal,
                       r.result.recovered ? 1 : 0, join(inst.hop_frames), join(r.result.selected),
                       join(r.result.ranks));
  }
  return out;
}

std::string niah_summary_csv(const std::vector<NiahSummary>& rows) {
  std::string out = "signal,runs,recovered,rate\n";
  for (const auto& r : rows) out += fmt::format("{},{},{},{}\n", r.signal, r.runs, r.recovered, r.rate());
  return out;
}

}  // namespace vtc
