#include "flairkit/cohort.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <ostream>
#include <tuple>

#include "csv.hpp"
#include "flairkit/rng.hpp"

namespace flairkit {

namespace {

const std::vector<std::string> kManifestColumns = {
    "case_id", "patient_id", "source_group", "tumor_type", "time_point", "target",
    "gt_path", "prob_path",  "tumor_mask_path", "brain_mask_path", "gt_ml"};

std::optional<std::string> optional_cell(const std::map<std::string, std::string>& row, const std::string& key) {
  auto it = row.find(key);
  if (it == row.end() || it->second.empty()) return std::nullopt;
  return it->second;
}

int time_tag_rank(const std::string& tag) {
  static const std::vector<std::string> order = {"pre", "post", "early_post", "post1", "post3", "post6"};
  const auto it = std::find(order.begin(), order.end(), tag);
  if (it == order.end()) throw Error("unknown time tag '" + tag + "'");
  return static_cast<int>(it - order.begin());
}

}  // namespace

std::string to_string(SourceGroup v) { return v == SourceGroup::A ? "A" : "B"; }

std::string to_string(TumorType v) {
  switch (v) {
    case TumorType::Gli: return "Gli";
    case TumorType::Met: return "Met";
    case TumorType::Men: return "Men";
  }
  return "?";
}

std::string to_string(TimePoint v) {
  switch (v) {
    case TimePoint::Pre: return "pre";
    case TimePoint::EarlyPost: return "early_post";
    case TimePoint::Post1: return "post1";
    case TimePoint::Post3: return "post3";
    case TimePoint::Post6: return "post6";
  }
  return "?";
}

std::string to_string(Target v) { return v == Target::FH ? "FH" : "SNFH"; }

SourceGroup parse_source(std::string_view t) {
  if (t == "A") return SourceGroup::A;
  if (t == "B") return SourceGroup::B;
  throw Error("unknown source group '" + std::string(t) + "'");
}

TumorType parse_tumor_type(std::string_view t) {
  if (t == "Gli") return TumorType::Gli;
  if (t == "Met") return TumorType::Met;
  if (t == "Men") return TumorType::Men;
  throw Error("unknown tumor type '" + std::string(t) + "'");
}

TimePoint parse_time_point(std::string_view t) {
  if (t == "pre") return TimePoint::Pre;
  if (t == "early_post") return TimePoint::EarlyPost;
  if (t == "post1") return TimePoint::Post1;
  if (t == "post3") return TimePoint::Post3;
  if (t == "post6") return TimePoint::Post6;
  throw Error("unknown time point '" + std::string(t) + "'");
}

Target parse_target(std::string_view t) {
  if (t == "FH") return Target::FH;
  if (t == "SNFH") return Target::SNFH;
  throw Error("unknown target '" + std::string(t) + "'");
}

std::string time_class(TimePoint tp) { return tp == TimePoint::Pre ? "pre" : "post"; }

void CaseRecord::validate() const {
  if (case_id.empty()) throw Error("case record without case_id");
  if (patient_id.empty()) throw Error("case " + case_id + ": empty patient_id");
  if (target == Target::SNFH && source != SourceGroup::B) {
    throw Error("case " + case_id + ": SNFH target is only available for source group B");
  }
  if ((tumor_type == TumorType::Men || tumor_type == TumorType::Met) && time_point != TimePoint::Pre) {
    throw Error("case " + case_id + ": meningioma and metastasis cases are pre-operative only");
  }
  if (gt_ml && !(*gt_ml >= 0.0)) throw Error("case " + case_id + ": negative gt_ml");
}

std::vector<CaseRecord> read_manifest(std::istream& in) {
  const csv::Table table = csv::read(in, {"case_id", "patient_id", "source_group", "tumor_type", "time_point",
                                          "target", "gt_path", "prob_path"});
  std::vector<CaseRecord> out;
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    const auto& row = table.rows[r];
    try {
      CaseRecord rec;
      rec.case_id = row.at("case_id");
      rec.patient_id = row.at("patient_id");
      rec.source = parse_source(row.at("source_group"));
      rec.tumor_type = parse_tumor_type(row.at("tumor_type"));
      rec.time_point = parse_time_point(row.at("time_point"));
      rec.target = parse_target(row.at("target"));
      rec.gt_path = row.at("gt_path");
      rec.prob_path = row.at("prob_path");
      rec.tumor_mask_path = optional_cell(row, "tumor_mask_path");
      rec.brain_mask_path = optional_cell(row, "brain_mask_path");
      if (auto v = optional_cell(row, "gt_ml")) rec.gt_ml = std::stod(*v);
      rec.validate();
      out.push_back(std::move(rec));
    } catch (const std::exception& e) {
      throw Error("manifest line " + std::to_string(table.line_numbers[r]) + ": " + e.what());
    }
  }
  return out;
}

std::vector<CaseRecord> read_manifest(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open manifest " + path.string());
  return read_manifest(in);
}

void write_manifest(std::ostream& out, const std::vector<CaseRecord>& records) {
  for (std::size_t i = 0; i < kManifestColumns.size(); ++i) out << (i ? "," : "") << kManifestColumns[i];
  out << '\n';
  for (const auto& r : records) {
    char ml[64] = "";
    if (r.gt_ml) *std::to_chars(ml, ml + sizeof(ml) - 1, *r.gt_ml).ptr = 0;
    out << csv::escape(r.case_id) << ',' << csv::escape(r.patient_id) << ',' << to_string(r.source) << ','
        << to_string(r.tumor_type) << ',' << to_string(r.time_point) << ',' << to_string(r.target) << ','
        << csv::escape(r.gt_path) << ',' << csv::escape(r.prob_path) << ','
        << csv::escape(r.tumor_mask_path.value_or("")) << ',' << csv::escape(r.brain_mask_path.value_or("")) << ','
        << ml << '\n';
  }
}

BinaryMask derive_fh_label(const BinaryMask& tumor_core, const BinaryMask& snfh) {
  require_same_geometry(tumor_core.geometry(), snfh.geometry(), "derive_fh_label");
  BinaryMask out(tumor_core.geometry());
  const auto a = tumor_core.values(), b = snfh.values();
  auto o = out.values();
  for (std::size_t i = 0; i < o.size(); ++i) o[i] = (a[i] || b[i]) ? 1 : 0;
  return out;
}

BinaryMask subtract_tumor(const BinaryMask& pred, const BinaryMask& tumor) {
  require_same_geometry(pred.geometry(), tumor.geometry(), "subtract_tumor");
  BinaryMask out(pred.geometry());
  const auto a = pred.values(), b = tumor.values();
  auto o = out.values();
  for (std::size_t i = 0; i < o.size(); ++i) o[i] = (a[i] && !b[i]) ? 1 : 0;
  return out;
}

ExclusionResult apply_exclusion(const std::vector<CaseRecord>& records, double exclusion_ml) {
  ExclusionResult r;
  for (const auto& rec : records) {
    if (!rec.gt_ml) throw Error("case " + rec.case_id + ": gt_ml must be known before exclusion");
    const double v = *rec.gt_ml;
    if (v > 0.0 && v <= exclusion_ml + 1e-12) {
      r.excluded.push_back(rec);
    } else {
      r.kept.push_back(rec);
    }
  }
  return r;
}

std::string subgroup_name(const std::set<SourceGroup>& sources, const std::set<std::string>& time_tags,
                          std::optional<TumorType> tumor_type, bool snfh_subtracted) {
  if (sources.empty() || time_tags.empty()) throw Error("subgroup_name needs at least one source and time tag");
  std::vector<std::string> tags(time_tags.begin(), time_tags.end());
  std::sort(tags.begin(), tags.end(),
            [](const std::string& a, const std::string& b) { return time_tag_rank(a) < time_tag_rank(b); });
  std::string name;
  if (tumor_type) name = to_string(*tumor_type) + "_";
  for (SourceGroup s : sources) name += to_string(s) + "_";
  for (std::size_t i = 0; i < tags.size(); ++i) name += (i ? "_" : "") + tags[i];
  if (snfh_subtracted) name += "*";
  return name;
}

int FoldPlan::fold_of(const std::string& patient_id) const {
  const auto it = assignment.find(patient_id);
  if (it == assignment.end()) throw Error("patient " + patient_id + " is not in the fold plan");
  return it->second;
}

int volume_bin(double gt_ml, const std::vector<double>& edges) {
  int bin = 0;
  for (double e : edges)
    if (gt_ml > e) ++bin;
  return bin;
}

FoldPlan stratified_split(const std::vector<CaseRecord>& records, int k, std::uint64_t seed,
                          const std::vector<double>& volume_bins) {
  if (k < 2) throw Error("stratified_split needs k >= 2");
  struct Patient {
    SourceGroup source;
    TumorType type;
    double max_ml;
  };
  std::map<std::string, Patient> patients;
  for (const auto& r : records) {
    if (r.patient_id.empty()) throw Error("case " + r.case_id + ": empty patient_id");
    if (!r.gt_ml) throw Error("case " + r.case_id + ": gt_ml required for stratification");
    auto [it, inserted] = patients.try_emplace(r.patient_id, Patient{r.source, r.tumor_type, *r.gt_ml});
    if (!inserted) it->second.max_ml = std::max(it->second.max_ml, *r.gt_ml);
  }

  using Stratum = std::tuple<int, int, int>;
  std::map<Stratum, std::vector<std::string>> strata;
  for (const auto& [id, p] : patients) {
    strata[{static_cast<int>(p.source), static_cast<int>(p.type), volume_bin(p.max_ml, volume_bins)}].push_back(id);
  }

  FoldPlan plan;
  plan.k = k;
  plan.seed = seed;
  CounterRng rng(seed);
  std::size_t cursor = 0;
  for (auto& [key, ids] : strata) {
    for (std::size_t i = ids.size(); i > 1; --i) {
      const auto j = static_cast<std::size_t>(rng.uniform_int(0, static_cast<std::int64_t>(i) - 1));
      std::swap(ids[i - 1], ids[j]);
    }
    for (const auto& id : ids) plan.assignment[id] = static_cast<int>(cursor++ % static_cast<std::size_t>(k));
  }

  for (int i = 0; i < k; ++i) {
    FoldRotation rot;
    rot.test = i;
    rot.val = (i + 1) % k;
    for (int f = 0; f < k; ++f)
      if (f != rot.test && f != rot.val) rot.train.push_back(f);
    plan.rotations.push_back(rot);
  }
  return plan;
}

void to_json(nlohmann::json& j, const FoldPlan& plan) {
  j = nlohmann::json::object();
  j["k"] = plan.k;
  j["seed"] = plan.seed;
  j["assignment"] = plan.assignment;
  auto rotations = nlohmann::json::array();
  for (const auto& r : plan.rotations) rotations.push_back({{"test", r.test}, {"val", r.val}, {"train", r.train}});
  j["rotations"] = rotations;
}

void from_json(const nlohmann::json& j, FoldPlan& plan) {
  plan.k = j.at("k").get<int>();
  plan.seed = j.value("seed", std::uint64_t{0});
  plan.assignment = j.at("assignment").get<std::map<std::string, int>>();
  plan.rotations.clear();
  for (const auto& r : j.at("rotations")) {
    plan.rotations.push_back({r.at("test").get<int>(), r.at("val").get<int>(), r.at("train").get<std::vector<int>>()});
  }
  for (const auto& [id, fold] : plan.assignment) {
    if (fold < 0 || fold >= plan.k) throw Error("fold plan assigns patient " + id + " to an invalid fold");
  }
}

}  // namespace flairkit
