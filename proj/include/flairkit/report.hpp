#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "flairkit/cohort.hpp"
#include "flairkit/metrics.hpp"
#include "flairkit/stats.hpp"

namespace flairkit {

/// One evaluated case at one threshold. Object fields and the volume delta
/// are present for TP cases only.
struct CaseMetrics {
  std::string case_id;
  std::string patient_id;
  SourceGroup source = SourceGroup::A;
  TumorType tumor_type = TumorType::Gli;
  TimePoint time_point = TimePoint::Pre;
  Target target = Target::FH;
  bool snfh_subtracted = false;
  int fold = 0;
  double threshold = 0.0;
  Outcome outcome = Outcome::TN;
  double gt_ml = 0.0;
  double pred_ml = 0.0;
  double voxel_dice = 0.0;
  std::optional<double> dice;
  std::optional<double> recall;
  std::optional<double> precision;
  std::optional<double> hd95_mm;
  std::optional<Direction> direction;
  std::optional<double> delta_ml;
};

CaseMetrics make_case_metrics(const CaseRecord& record, int fold, double threshold, const CaseEvaluation& ev);

/// Doubles are written in shortest round-trip form; empty cells are absent values.
void write_case_metrics(std::ostream& out, const std::vector<CaseMetrics>& cases);
std::vector<CaseMetrics> read_case_metrics(std::istream& in);

enum class GroupKey { Source, TumorType, TimeClass, TimePoint, Target };

/// Default grouping: test sets such as "Gli_A_pre", split by target.
std::vector<GroupKey> default_group_by();

struct MeanStd {
  double mean = 0.0;
  double std = 0.0;
};

struct AggregateRow {
  std::string test_set;
  std::string target;
  std::size_t n_cases = 0;
  std::size_t n_positive = 0;
  std::size_t n_tp = 0;
  std::optional<double> detection_rate;  // percent
  // Fractions in [0,1] for dice/recall/precision, millimetres for hd95.
  std::optional<MeanStd> dice;
  std::optional<MeanStd> recall;
  std::optional<MeanStd> precision;
  std::optional<MeanStd> hd95_mm;
  std::optional<MedianIqr> over;
  std::optional<MedianIqr> under;
};

/// Object metrics over TP cases, detection rate over positive cases, sample
/// std. Rows come out in (target, tumor type, source, time) order and do not
/// depend on input order. Throws Error on empty input.
std::vector<AggregateRow> aggregate(const std::vector<CaseMetrics>& cases,
                                    const std::vector<GroupKey>& group_by = default_group_by());

enum class TableFormat { Csv, Json, Markdown };

TableFormat parse_table_format(std::string_view text);

/// Two-decimal rendering: "NN.NN±NN.NN" (metrics x100, HD95 in mm),
/// "M.MM [L.LL-U.UU]" for deltas, "-" for absent cells. Empty rows produce a
/// header and a warning on `diagnostics`.
std::string emit_table(const std::vector<AggregateRow>& rows, TableFormat format, std::ostream& diagnostics);

/// Inverse of the CSV rendering; values are the two-decimal numbers divided
/// back into row units.
std::vector<AggregateRow> parse_table_csv(std::istream& in);

/// group,gt_ml,dice,outcome per case; FN and FP cases carry dice 0, TN an empty cell.
std::string emit_scatter_data(const std::vector<CaseMetrics>& cases);

/// Default test set name of a case, e.g. "Men_B_pre".
std::string case_group(const CaseMetrics& c);

}  // namespace flairkit
