#include "flairkit/report.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cstdio>
#include <map>
#include <ostream>
#include <sstream>

#include "csv.hpp"

namespace flairkit {

using nlohmann::json;

namespace {

const std::vector<std::string> kCaseColumns = {
    "case_id",  "patient_id", "source_group", "tumor_type", "time_point", "target",    "snfh_subtracted",
    "fold",     "threshold",  "outcome",      "gt_ml",      "pred_ml",    "voxel_dice", "dice",
    "recall",   "precision",  "hd95_mm",      "direction",  "delta_ml"};

const std::vector<std::string> kTableColumns = {
    "test_set",       "target",      "n_cases",     "n_positive",     "n_tp",           "detection_rate",
    "dice_mean",      "dice_std",    "recall_mean", "recall_std",     "precision_mean", "precision_std",
    "hd95_mean",      "hd95_std",    "over_median", "over_q1",        "over_q3",        "over_n",
    "under_median",   "under_q1",    "under_q3",    "under_n"};

std::string exact(double v) {
  char buf[40];
  const auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

std::string exact(const std::optional<double>& v) { return v ? exact(*v) : std::string(); }

std::string fixed2(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

double parse_double(const std::string& text, const std::string& column) {
  try {
    std::size_t used = 0;
    const double v = std::stod(text, &used);
    if (used != text.size()) throw std::invalid_argument(text);
    return v;
  } catch (const std::exception&) {
    throw Error("column '" + column + "': cannot parse '" + text + "' as a number");
  }
}

std::optional<double> parse_optional(const std::map<std::string, std::string>& row, const std::string& column) {
  const std::string& text = row.at(column);
  if (text.empty()) return std::nullopt;
  return parse_double(text, column);
}

bool case_less(const CaseMetrics& a, const CaseMetrics& b) {
  return std::tie(a.case_id, a.threshold, a.fold) < std::tie(b.case_id, b.threshold, b.fold);
}

std::vector<double> collect(const std::vector<const CaseMetrics*>& cases, std::optional<double> CaseMetrics::*field) {
  std::vector<double> out;
  for (const auto* c : cases)
    if (c->outcome == Outcome::TP && (c->*field)) out.push_back(*(c->*field));
  return out;
}

std::optional<MeanStd> mean_std(const std::vector<double>& v) {
  if (v.empty()) return std::nullopt;
  return MeanStd{mean(v), sample_std(v)};
}

bool has(const std::vector<GroupKey>& keys, GroupKey k) { return std::find(keys.begin(), keys.end(), k) != keys.end(); }

// Display strings for the numeric table cells, in kTableColumns order from index 5.
std::vector<std::string> numeric_cells(const AggregateRow& r) {
  std::vector<std::string> out;
  out.push_back(r.detection_rate ? fixed2(*r.detection_rate) : "");
  auto push_ms = [&](const std::optional<MeanStd>& m, double scale) {
    out.push_back(m ? fixed2(m->mean * scale) : "");
    out.push_back(m ? fixed2(m->std * scale) : "");
  };
  push_ms(r.dice, 100.0);
  push_ms(r.recall, 100.0);
  push_ms(r.precision, 100.0);
  push_ms(r.hd95_mm, 1.0);
  auto push_mi = [&](const std::optional<MedianIqr>& m) {
    out.push_back(m ? fixed2(m->median) : "");
    out.push_back(m ? fixed2(m->q1) : "");
    out.push_back(m ? fixed2(m->q3) : "");
    out.push_back(std::to_string(m ? m->count : 0));
  };
  push_mi(r.over);
  push_mi(r.under);
  return out;
}

std::string mean_std_cell(const std::optional<MeanStd>& m, double scale) {
  if (!m) return "-";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%05.2f±%05.2f", m->mean * scale, m->std * scale);
  return buf;
}

}  // namespace

CaseMetrics make_case_metrics(const CaseRecord& record, int fold, double threshold, const CaseEvaluation& ev) {
  CaseMetrics m;
  m.case_id = record.case_id;
  m.patient_id = record.patient_id;
  m.source = record.source;
  m.tumor_type = record.tumor_type;
  m.time_point = record.time_point;
  m.target = record.target;
  m.snfh_subtracted = record.target == Target::SNFH && record.tumor_mask_path.has_value();
  m.fold = fold;
  m.threshold = threshold;
  m.outcome = ev.classification.outcome;
  m.gt_ml = ev.classification.gt_ml;
  m.pred_ml = ev.classification.pred_ml;
  m.voxel_dice = ev.classification.voxel_dice;
  if (ev.object) {
    m.dice = ev.object->dice;
    m.recall = ev.object->recall;
    m.precision = ev.object->precision;
    m.hd95_mm = ev.object->hd95_mm;
  }
  if (ev.delta) {
    m.direction = ev.delta->direction;
    m.delta_ml = ev.delta->delta_ml;
  }
  return m;
}

void write_case_metrics(std::ostream& out, const std::vector<CaseMetrics>& cases) {
  for (std::size_t i = 0; i < kCaseColumns.size(); ++i) out << (i ? "," : "") << kCaseColumns[i];
  out << '\n';
  for (const auto& c : cases) {
    out << csv::escape(c.case_id) << ',' << csv::escape(c.patient_id) << ',' << to_string(c.source) << ','
        << to_string(c.tumor_type) << ',' << to_string(c.time_point) << ',' << to_string(c.target) << ','
        << (c.snfh_subtracted ? 1 : 0) << ',' << c.fold << ',' << exact(c.threshold) << ',' << to_string(c.outcome)
        << ',' << exact(c.gt_ml) << ',' << exact(c.pred_ml) << ',' << exact(c.voxel_dice) << ',' << exact(c.dice)
        << ',' << exact(c.recall) << ',' << exact(c.precision) << ',' << exact(c.hd95_mm) << ','
        << (c.direction ? to_string(*c.direction) : "") << ',' << exact(c.delta_ml) << '\n';
  }
}

std::vector<CaseMetrics> read_case_metrics(std::istream& in) {
  const csv::Table table = csv::read(in, kCaseColumns);
  std::vector<CaseMetrics> out;
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    const auto& row = table.rows[r];
    try {
      CaseMetrics c;
      c.case_id = row.at("case_id");
      c.patient_id = row.at("patient_id");
      c.source = parse_source(row.at("source_group"));
      c.tumor_type = parse_tumor_type(row.at("tumor_type"));
      c.time_point = parse_time_point(row.at("time_point"));
      c.target = parse_target(row.at("target"));
      c.snfh_subtracted = row.at("snfh_subtracted") == "1";
      c.fold = static_cast<int>(parse_double(row.at("fold"), "fold"));
      c.threshold = parse_double(row.at("threshold"), "threshold");
      c.outcome = parse_outcome(row.at("outcome"));
      c.gt_ml = parse_double(row.at("gt_ml"), "gt_ml");
      c.pred_ml = parse_double(row.at("pred_ml"), "pred_ml");
      c.voxel_dice = parse_double(row.at("voxel_dice"), "voxel_dice");
      c.dice = parse_optional(row, "dice");
      c.recall = parse_optional(row, "recall");
      c.precision = parse_optional(row, "precision");
      c.hd95_mm = parse_optional(row, "hd95_mm");
      if (!row.at("direction").empty()) c.direction = parse_direction(row.at("direction"));
      c.delta_ml = parse_optional(row, "delta_ml");
      out.push_back(std::move(c));
    } catch (const Error& e) {
      throw Error("metrics CSV line " + std::to_string(table.line_numbers[r]) + ": " + e.what());
    }
  }
  return out;
}

std::vector<GroupKey> default_group_by() {
  return {GroupKey::TumorType, GroupKey::Source, GroupKey::TimeClass, GroupKey::Target};
}

std::string case_group(const CaseMetrics& c) {
  return subgroup_name({c.source}, {time_class(c.time_point)}, c.tumor_type, c.snfh_subtracted);
}

std::vector<AggregateRow> aggregate(const std::vector<CaseMetrics>& cases, const std::vector<GroupKey>& group_by) {
  if (cases.empty()) throw Error("aggregate: no cases");
  std::vector<const CaseMetrics*> sorted;
  for (const auto& c : cases) sorted.push_back(&c);
  std::sort(sorted.begin(), sorted.end(), [](const auto* a, const auto* b) { return case_less(*a, *b); });

  // Sort key: target, tumor type, source, time class, time point; -1 when not grouped.
  std::map<std::array<int, 5>, std::vector<const CaseMetrics*>> groups;
  for (const auto* c : sorted) {
    std::array<int, 5> key{-1, -1, -1, -1, -1};
    if (has(group_by, GroupKey::Target)) key[0] = static_cast<int>(c->target);
    if (has(group_by, GroupKey::TumorType)) key[1] = static_cast<int>(c->tumor_type);
    if (has(group_by, GroupKey::Source)) key[2] = static_cast<int>(c->source);
    if (has(group_by, GroupKey::TimeClass)) key[3] = c->time_point == TimePoint::Pre ? 0 : 1;
    if (has(group_by, GroupKey::TimePoint)) key[4] = static_cast<int>(c->time_point);
    groups[key].push_back(c);
  }

  std::vector<AggregateRow> rows;
  for (const auto& [key, members] : groups) {
    AggregateRow row;
    std::set<SourceGroup> sources;
    std::set<std::string> time_tags;
    std::set<std::string> targets;
    bool all_subtracted = true;
    std::vector<Outcome> outcomes;
    std::vector<double> over, under;
    for (const auto* c : members) {
      sources.insert(c->source);
      time_tags.insert(has(group_by, GroupKey::TimePoint) ? to_string(c->time_point) : time_class(c->time_point));
      targets.insert(to_string(c->target));
      all_subtracted = all_subtracted && c->snfh_subtracted;
      outcomes.push_back(c->outcome);
      if (c->outcome == Outcome::TP && c->direction && c->delta_ml) {
        if (*c->direction == Direction::Over) over.push_back(*c->delta_ml);
        if (*c->direction == Direction::Under) under.push_back(*c->delta_ml);
      }
    }
    const std::optional<TumorType> tumor =
        key[1] >= 0 ? std::optional<TumorType>(members.front()->tumor_type) : std::nullopt;
    row.test_set = subgroup_name(sources, time_tags, tumor, all_subtracted);
    for (const auto& t : targets) row.target += (row.target.empty() ? "" : "+") + t;
    row.n_cases = members.size();
    row.n_positive = static_cast<std::size_t>(
        std::count_if(outcomes.begin(), outcomes.end(), [](Outcome o) { return o == Outcome::TP || o == Outcome::FN; }));
    row.n_tp = static_cast<std::size_t>(std::count(outcomes.begin(), outcomes.end(), Outcome::TP));
    row.detection_rate = detection_rate(std::span<const Outcome>(outcomes));
    row.dice = mean_std(collect(members, &CaseMetrics::dice));
    row.recall = mean_std(collect(members, &CaseMetrics::recall));
    row.precision = mean_std(collect(members, &CaseMetrics::precision));
    row.hd95_mm = mean_std(collect(members, &CaseMetrics::hd95_mm));
    row.over = median_iqr(over);
    row.under = median_iqr(under);
    rows.push_back(std::move(row));
  }
  return rows;
}

TableFormat parse_table_format(std::string_view text) {
  if (text == "csv") return TableFormat::Csv;
  if (text == "json") return TableFormat::Json;
  if (text == "markdown" || text == "md") return TableFormat::Markdown;
  throw Error("unknown table format '" + std::string(text) + "'");
}

std::string emit_table(const std::vector<AggregateRow>& rows, TableFormat format, std::ostream& diagnostics) {
  if (rows.empty()) diagnostics << "warning: no rows to report; emitting header only\n";
  std::ostringstream out;
  switch (format) {
    case TableFormat::Markdown: {
      out << "| Test set | Target | Detection rate | Dice | Recall | Precision | HD95 | Over Δ (mL) | Over # Samples "
             "| Under Δ (mL) | Under # Samples |\n";
      out << "|---|---|---|---|---|---|---|---|---|---|---|\n";
      for (const auto& r : rows) {
        out << "| " << r.test_set << " | " << r.target << " | "
            << (r.detection_rate ? fixed2(*r.detection_rate) : "-") << " | " << mean_std_cell(r.dice, 100.0) << " | "
            << mean_std_cell(r.recall, 100.0) << " | " << mean_std_cell(r.precision, 100.0) << " | "
            << mean_std_cell(r.hd95_mm, 1.0) << " | " << (r.over ? format_median_iqr(*r.over) : "-") << " | "
            << (r.over ? r.over->count : 0) << " | " << (r.under ? format_median_iqr(*r.under) : "-") << " | "
            << (r.under ? r.under->count : 0) << " |\n";
      }
      break;
    }
    case TableFormat::Csv: {
      for (std::size_t i = 0; i < kTableColumns.size(); ++i) out << (i ? "," : "") << kTableColumns[i];
      out << '\n';
      for (const auto& r : rows) {
        out << csv::escape(r.test_set) << ',' << csv::escape(r.target) << ',' << r.n_cases << ',' << r.n_positive
            << ',' << r.n_tp;
        for (const auto& cell : numeric_cells(r)) out << ',' << cell;
        out << '\n';
      }
      break;
    }
    case TableFormat::Json: {
      json arr = json::array();
      for (const auto& r : rows) {
        json o;
        o["test_set"] = r.test_set;
        o["target"] = r.target;
        o["n_cases"] = r.n_cases;
        o["n_positive"] = r.n_positive;
        o["n_tp"] = r.n_tp;
        const auto cells = numeric_cells(r);
        for (std::size_t i = 0; i < cells.size(); ++i) {
          const std::string& name = kTableColumns[i + 5];
          if (cells[i].empty()) {
            o[name] = nullptr;
          } else if (name == "over_n" || name == "under_n") {
            o[name] = std::stoull(cells[i]);
          } else {
            o[name] = std::stod(cells[i]);
          }
        }
        arr.push_back(std::move(o));
      }
      out << arr.dump(2) << '\n';
      break;
    }
  }
  return out.str();
}

std::vector<AggregateRow> parse_table_csv(std::istream& in) {
  const csv::Table table = csv::read(in, kTableColumns);
  std::vector<AggregateRow> rows;
  for (const auto& row : table.rows) {
    AggregateRow r;
    r.test_set = row.at("test_set");
    r.target = row.at("target");
    r.n_cases = static_cast<std::size_t>(parse_double(row.at("n_cases"), "n_cases"));
    r.n_positive = static_cast<std::size_t>(parse_double(row.at("n_positive"), "n_positive"));
    r.n_tp = static_cast<std::size_t>(parse_double(row.at("n_tp"), "n_tp"));
    r.detection_rate = parse_optional(row, "detection_rate");
    auto ms = [&](const std::string& prefix, double scale) -> std::optional<MeanStd> {
      const auto m = parse_optional(row, prefix + "_mean");
      const auto s = parse_optional(row, prefix + "_std");
      if (!m || !s) return std::nullopt;
      return MeanStd{*m / scale, *s / scale};
    };
    r.dice = ms("dice", 100.0);
    r.recall = ms("recall", 100.0);
    r.precision = ms("precision", 100.0);
    r.hd95_mm = ms("hd95", 1.0);
    auto mi = [&](const std::string& prefix) -> std::optional<MedianIqr> {
      const auto med = parse_optional(row, prefix + "_median");
      if (!med) return std::nullopt;
      return MedianIqr{*med, *parse_optional(row, prefix + "_q1"), *parse_optional(row, prefix + "_q3"),
                       static_cast<std::size_t>(parse_double(row.at(prefix + "_n"), prefix + "_n"))};
    };
    r.over = mi("over");
    r.under = mi("under");
    rows.push_back(std::move(r));
  }
  return rows;
}

std::string emit_scatter_data(const std::vector<CaseMetrics>& cases) {
  std::vector<const CaseMetrics*> sorted;
  for (const auto& c : cases) sorted.push_back(&c);
  std::sort(sorted.begin(), sorted.end(), [](const auto* a, const auto* b) { return case_less(*a, *b); });
  std::ostringstream out;
  out << "group,gt_ml,dice,outcome\n";
  for (const auto* c : sorted) {
    std::string group = case_group(*c);
    if (c->target == Target::SNFH) group += " (SNFH)";
    std::string dice;
    if (c->outcome == Outcome::TP) dice = exact(c->dice.value_or(0.0));
    if (c->outcome == Outcome::FN || c->outcome == Outcome::FP) dice = "0";
    out << csv::escape(group) << ',' << exact(c->gt_ml) << ',' << dice << ',' << to_string(c->outcome) << '\n';
  }
  return out.str();
}

}  // namespace flairkit
