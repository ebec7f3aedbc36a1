#pragma once

#include <optional>
#include <span>
#include <string>

#include "flairkit/components.hpp"
#include "flairkit/volume.hpp"

namespace flairkit {

enum class Outcome { TP, FP, FN, TN };

std::string to_string(Outcome outcome);
Outcome parse_outcome(std::string_view text);

struct DetectionRules {
  double positive_threshold_ml = 0.1;
  double tp_dice_min = 0.001;
};

struct CaseClassification {
  Outcome outcome = Outcome::TN;
  double gt_ml = 0.0;
  double pred_ml = 0.0;
  double voxel_dice = 0.0;
};

/// 2|A n B| / (|A| + |B|); 1 when both are empty.
double voxelwise_dice(const BinaryMask& a, const BinaryMask& b);

/// Positive means volume strictly above the positiveness threshold. Both
/// positive with voxel Dice >= tp_dice_min is TP; both positive below it is FN.
CaseClassification classify_case(const BinaryMask& gt, const BinaryMask& pred, const DetectionRules& rules = {});

/// Same rule from precomputed quantities.
CaseClassification classify(double gt_ml, double pred_ml, double voxel_dice, const DetectionRules& rules = {});

/// 100 * TP / (TP + FN); nullopt when the list has no positive case.
std::optional<double> detection_rate(std::span<const CaseClassification> cases);
std::optional<double> detection_rate(std::span<const Outcome> outcomes);

/// Overlap-based pairing: a predicted component is attached to every ground
/// truth component it shares at least one voxel with.
struct Pairing {
  struct Match {
    std::uint32_t gt = 0;
    std::vector<std::uint32_t> preds;  // ascending
    std::int64_t overlap = 0;          // |gt component n union of preds|
  };
  std::vector<Match> matches;  // one entry per GT component, label order
  std::vector<std::uint32_t> unmatched_pred;

  std::vector<std::uint32_t> unmatched_gt() const;
};

Pairing pair_components(const LabeledComponents& gt, const LabeledComponents& pred);

enum class ObjectWeighting { Unweighted, Volume };

struct ObjectRules {
  /// Unmatched predicted components above this volume enter the precision
  /// average with score 0.
  double unmatched_pred_min_ml = 0.05;
  ObjectWeighting weighting = ObjectWeighting::Unweighted;
};

struct ObjectScores {
  double dice = 0.0;
  double recall = 0.0;
  double precision = 0.0;
  double hd95_mm = 0.0;
  Pairing pairing;
};

/// Per-GT-component Dice/recall/precision against the union of attached
/// predictions, averaged per case. Missed GT components score 0 for Dice and
/// recall and do not enter precision. HD95 is taken between the union of
/// matched GT components and the union of their attached predictions.
/// Throws Error unless the case is TP.
ObjectScores object_scores(const LabeledComponents& gt, const LabeledComponents& pred, const Pairing& pairing,
                           const CaseClassification& classification, const ObjectRules& rules = {});

/// 95th percentile of the pooled symmetric boundary-to-boundary distances (mm).
/// Throws Error if either mask is empty.
double hd95(const BinaryMask& a, const BinaryMask& b);

enum class Direction { Over, Under, Exact };

std::string to_string(Direction d);
Direction parse_direction(std::string_view text);

struct VolumeDelta {
  Direction direction = Direction::Exact;
  double delta_ml = 0.0;
};

VolumeDelta volume_delta(double gt_ml, double pred_ml);
VolumeDelta volume_delta(const BinaryMask& gt, const BinaryMask& pred);

/// Everything computed for one case at one threshold.
struct CaseEvaluation {
  CaseClassification classification;
  std::optional<ObjectScores> object;  // TP only
  std::optional<VolumeDelta> delta;    // TP only
};

}  // namespace flairkit
