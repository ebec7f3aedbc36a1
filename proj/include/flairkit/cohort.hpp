#pragma once

#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "flairkit/volume.hpp"

namespace flairkit {

enum class SourceGroup { A, B };
enum class TumorType { Gli, Met, Men };
enum class TimePoint { Pre, EarlyPost, Post1, Post3, Post6 };
enum class Target { FH, SNFH };

std::string to_string(SourceGroup v);
std::string to_string(TumorType v);
std::string to_string(TimePoint v);
std::string to_string(Target v);
SourceGroup parse_source(std::string_view text);
TumorType parse_tumor_type(std::string_view text);
TimePoint parse_time_point(std::string_view text);
Target parse_target(std::string_view text);

/// "pre" for pre-operative scans, "post" for every post-operative time point.
std::string time_class(TimePoint tp);

struct CaseRecord {
  std::string case_id;
  std::string patient_id;
  SourceGroup source = SourceGroup::A;
  TumorType tumor_type = TumorType::Gli;
  TimePoint time_point = TimePoint::Pre;
  Target target = Target::FH;
  std::string gt_path;
  std::string prob_path;
  std::optional<std::string> tumor_mask_path;
  std::optional<std::string> brain_mask_path;
  std::optional<double> gt_ml;

  /// Nonempty ids; SNFH only for group B; Men/Met only pre-operative.
  void validate() const;
};

/// Manifest CSV with header
/// case_id,patient_id,source_group,tumor_type,time_point,target,gt_path,prob_path,
/// tumor_mask_path,brain_mask_path,gt_ml (empty cells = absent).
std::vector<CaseRecord> read_manifest(std::istream& in);
std::vector<CaseRecord> read_manifest(const std::filesystem::path& path);
void write_manifest(std::ostream& out, const std::vector<CaseRecord>& records);

/// Voxelwise union of tumor core and SNFH labels.
BinaryMask derive_fh_label(const BinaryMask& tumor_core, const BinaryMask& snfh);

/// pred \ tumor.
BinaryMask subtract_tumor(const BinaryMask& pred, const BinaryMask& tumor);

struct ExclusionResult {
  std::vector<CaseRecord> kept;
  std::vector<CaseRecord> excluded;
};

/// Excludes 0 < gt_ml <= exclusion_ml; gt_ml == 0 stays as a negative case.
/// Throws Error if a record has no gt_ml.
ExclusionResult apply_exclusion(const std::vector<CaseRecord>& records, double exclusion_ml = 0.1);

/// e.g. ({A,B},{pre,post}) -> "A_B_pre_post"; tumor type prepended; "*" appended
/// for SNFH obtained by tumor subtraction. Time tags are "pre", "post" or any
/// TimePoint name, ordered pre, post, early_post, post1, post3, post6.
std::string subgroup_name(const std::set<SourceGroup>& sources, const std::set<std::string>& time_tags,
                          std::optional<TumorType> tumor_type = std::nullopt, bool snfh_subtracted = false);

struct FoldRotation {
  int test = 0;
  int val = 0;
  std::vector<int> train;
};

struct FoldPlan {
  int k = 5;
  std::uint64_t seed = 0;
  std::map<std::string, int> assignment;  // patient_id -> fold
  std::vector<FoldRotation> rotations;

  int fold_of(const std::string& patient_id) const;
};

/// Volume bin of a patient: number of edges strictly below gt_ml
/// (default edges {1, 10, 50} -> bins <=1, 1-10, 10-50, >50 mL).
int volume_bin(double gt_ml, const std::vector<double>& edges);

/// Patients are stratified by (source, tumor type, volume bin of their largest
/// gt_ml); each stratum is shuffled with the seed and dealt round-robin,
/// continuing the fold cursor across strata. Rotation i tests fold i,
/// validates on (i+1) mod k and trains on the rest.
FoldPlan stratified_split(const std::vector<CaseRecord>& records, int k = 5, std::uint64_t seed = 0,
                          const std::vector<double>& volume_bins = {1.0, 10.0, 50.0});

void to_json(nlohmann::json& j, const FoldPlan& plan);
void from_json(const nlohmann::json& j, FoldPlan& plan);

}  // namespace flairkit
