#pragma once

#include <span>

#include "flairkit/components.hpp"
#include "flairkit/metrics.hpp"
#include "flairkit/volume.hpp"

namespace flairkit {

/// Zeroes probabilities outside the brain mask.
ProbabilityMap apply_brain_mask(const ProbabilityMap& prob, const BinaryMask& brain);

/// Voxel set iff probability > threshold (strict).
BinaryMask binarize(const ProbabilityMap& prob, double threshold);

/// {0.05, 0.15, ..., 0.95}.
std::vector<double> default_thresholds();

struct EvaluationRules {
  DetectionRules detection;
  ComponentFilter filter;
  ObjectRules object;
};

/// Filters a binary prediction and scores it against the ground truth.
/// `gt_components` must be the labeling of `gt` at rules.filter.connectivity.
CaseEvaluation evaluate_prediction(const BinaryMask& gt, const LabeledComponents& gt_components,
                                   const BinaryMask& prediction, const EvaluationRules& rules);

/// binarize -> optional tumor subtraction -> evaluate_prediction, once per threshold.
std::vector<CaseEvaluation> evaluate_thresholds(const ProbabilityMap& prob, const BinaryMask& gt,
                                                std::span<const double> thresholds, const EvaluationRules& rules,
                                                const BinaryMask* subtract = nullptr);

/// Score a case contributes to threshold selection: object Dice for TP, 0 for
/// FN and FP, 1 for TN.
double selection_score(const CaseEvaluation& evaluation);

struct SweepCase {
  const ProbabilityMap* prob = nullptr;
  const BinaryMask* gt = nullptr;
  const BinaryMask* subtract = nullptr;
};

struct ThresholdScore {
  double threshold = 0.0;
  double mean_dice = 0.0;
  std::optional<double> detection_rate;
};

struct SweepResult {
  double best_threshold = 0.0;
  std::size_t best_index = 0;
  std::vector<ThresholdScore> scores;
};

/// Picks the threshold with the highest mean selection_score; ties go to the
/// lower threshold. per_case[c][t] is case c evaluated at thresholds[t].
SweepResult select_threshold(const std::vector<std::vector<CaseEvaluation>>& per_case,
                             std::span<const double> thresholds);

/// Throws Error on an empty case list or thresholds that are not strictly
/// increasing within [0,1].
SweepResult threshold_sweep(std::span<const SweepCase> cases, std::span<const double> thresholds,
                            const EvaluationRules& rules = {});

}  // namespace flairkit
