#pragma once

// CSV emitters. Every report starts with a header row; numbers use the
// shortest round-trip form so outputs are byte-stable.

#include <string>
#include <vector>

#include "vtc/bench.hpp"
#include "vtc/qc_comp.hpp"
#include "vtc/schedule.hpp"

namespace vtc {

/// layer,tokens_per_frame rows for layers 0..L.
std::string schedule_csv(const CompressionSchedule& schedule);

/// frame,score,coverage,selected
std::string score_csv(const FrameScoreTable& table, const SelectionResult& selection);

/// frame,score
std::string selection_csv(const SelectionResult& selection);

struct BiasReportRow {
  std::string name;
  BiasOracleConfig config;
  std::size_t global_rank = 0;
  std::size_t segmented_rank = 0;
};

/// fixture,seed,total_frames,needle_frame,needle_signal,begin_bias,end_bias,global_rank,segmented_rank
std::string bias_csv(const std::vector<BiasReportRow>& rows);

struct NiahReportRow {
  NiahInstance instance;
  double signal = 0.0;
  NiahResult result;
};

/// seed,total_frames,hops,signal,recovered,hop_frames,selected,ranks (lists joined by ';')
std::string niah_csv(const std::vector<NiahReportRow>& rows);

/// signal,runs,recovered,rate
std::string niah_summary_csv(const std::vector<NiahSummary>& rows);

}  // namespace vtc
