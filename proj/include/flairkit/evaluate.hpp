#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "flairkit/cohort.hpp"
#include "flairkit/config.hpp"
#include "flairkit/report.hpp"

namespace flairkit {

struct CaseFailure {
  std::string case_id;
  std::string message;
};

/// Threshold applied to the test fold `fold` for `target`, picked on the
/// cases of `selected_on` (the rotation's validation fold, or the test fold
/// itself when the validation fold has no case of that target).
struct FoldThreshold {
  int fold = 0;
  Target target = Target::FH;
  int selected_on = 0;
  double threshold = 0.0;
  double mean_score = 0.0;
  std::size_t n_selection_cases = 0;
};

struct EvaluationResult {
  std::vector<CaseMetrics> cases;          // selected threshold, case_id order
  std::vector<CaseMetrics> all_thresholds;  // every threshold, case_id then threshold order
  std::vector<FoldThreshold> thresholds;
  std::vector<CaseFailure> failures;
  std::vector<std::string> excluded;
  std::vector<AggregateRow> table;  // empty when nothing was evaluated

  bool complete() const { return failures.empty(); }
};

/// Relative manifest paths are resolved against `base_dir`. Without a fold
/// plan every case is treated as fold 0 and selects on itself. Cases whose
/// inputs cannot be read are reported in `failures`; the rest still run.
EvaluationResult run_evaluation(const std::vector<CaseRecord>& records, const std::optional<FoldPlan>& plan,
                                const Config& config, const std::filesystem::path& base_dir = {});

/// cases.csv, cases_all_thresholds.csv, table.md, table.csv, table.json,
/// scatter.csv and metadata.json.
void write_evaluation(const EvaluationResult& result, const Config& config, const std::filesystem::path& out_dir);

}  // namespace flairkit
