#include "flairkit/postprocess.hpp"

#include <algorithm>

namespace flairkit {

ProbabilityMap apply_brain_mask(const ProbabilityMap& prob, const BinaryMask& brain) {
  require_same_geometry(prob.geometry(), brain.geometry(), "apply_brain_mask");
  ProbabilityMap out = prob;
  const auto b = brain.values();
  auto v = out.values();
  for (std::size_t i = 0; i < v.size(); ++i)
    if (!b[i]) v[i] = 0.f;
  return out;
}

BinaryMask binarize(const ProbabilityMap& prob, double threshold) {
  if (!(threshold >= 0.0 && threshold <= 1.0)) throw Error("threshold must lie in [0,1]");
  BinaryMask out(prob.geometry());
  std::transform(prob.values().begin(), prob.values().end(), out.values().begin(),
                 [threshold](float p) -> std::uint8_t { return static_cast<double>(p) > threshold; });
  return out;
}

std::vector<double> default_thresholds() {
  std::vector<double> t;
  for (int i = 0; i < 10; ++i) t.push_back((2.0 * i + 1.0) / 20.0);
  return t;
}

CaseEvaluation evaluate_prediction(const BinaryMask& gt, const LabeledComponents& gt_components,
                                   const BinaryMask& prediction, const EvaluationRules& rules) {
  require_same_geometry(gt.geometry(), prediction.geometry(), "evaluate_prediction");
  const LabeledComponents pred_cc =
      filter_components(connected_components(prediction, rules.filter.connectivity), rules.filter);
  const BinaryMask pred = to_mask(pred_cc);

  CaseEvaluation out;
  out.classification = classify_case(gt, pred, rules.detection);
  if (out.classification.outcome == Outcome::TP) {
    const Pairing pairing = pair_components(gt_components, pred_cc);
    out.object = object_scores(gt_components, pred_cc, pairing, out.classification, rules.object);
    out.delta = volume_delta(out.classification.gt_ml, out.classification.pred_ml);
  }
  return out;
}

std::vector<CaseEvaluation> evaluate_thresholds(const ProbabilityMap& prob, const BinaryMask& gt,
                                                std::span<const double> thresholds, const EvaluationRules& rules,
                                                const BinaryMask* subtract) {
  require_same_geometry(prob.geometry(), gt.geometry(), "evaluate_thresholds");
  if (subtract) require_same_geometry(prob.geometry(), subtract->geometry(), "evaluate_thresholds");
  const LabeledComponents gt_cc = connected_components(gt, rules.filter.connectivity);
  std::vector<CaseEvaluation> out;
  out.reserve(thresholds.size());
  for (double t : thresholds) {
    BinaryMask pred = binarize(prob, t);
    if (subtract) {
      auto p = pred.values();
      const auto s = subtract->values();
      for (std::size_t i = 0; i < p.size(); ++i)
        if (s[i]) p[i] = 0;
    }
    out.push_back(evaluate_prediction(gt, gt_cc, pred, rules));
  }
  return out;
}

double selection_score(const CaseEvaluation& evaluation) {
  switch (evaluation.classification.outcome) {
    case Outcome::TP: return evaluation.object ? evaluation.object->dice : 0.0;
    case Outcome::TN: return 1.0;
    case Outcome::FN:
    case Outcome::FP: return 0.0;
  }
  return 0.0;
}

SweepResult select_threshold(const std::vector<std::vector<CaseEvaluation>>& per_case,
                             std::span<const double> thresholds) {
  if (per_case.empty()) throw Error("threshold selection needs at least one case");
  SweepResult result;
  for (std::size_t t = 0; t < thresholds.size(); ++t) {
    double sum = 0.0;
    std::vector<Outcome> outcomes;
    for (const auto& evaluations : per_case) {
      if (evaluations.size() != thresholds.size()) throw Error("per-case evaluations do not match thresholds");
      sum += selection_score(evaluations[t]);
      outcomes.push_back(evaluations[t].classification.outcome);
    }
    ThresholdScore s;
    s.threshold = thresholds[t];
    s.mean_dice = sum / static_cast<double>(per_case.size());
    s.detection_rate = detection_rate(std::span<const Outcome>(outcomes));
    result.scores.push_back(s);
    if (t == 0 || s.mean_dice > result.scores[result.best_index].mean_dice) result.best_index = t;
  }
  result.best_threshold = thresholds[result.best_index];
  return result;
}

SweepResult threshold_sweep(std::span<const SweepCase> cases, std::span<const double> thresholds,
                            const EvaluationRules& rules) {
  if (cases.empty()) throw Error("threshold_sweep: empty case list");
  if (thresholds.empty()) throw Error("threshold_sweep: no thresholds");
  for (std::size_t i = 0; i < thresholds.size(); ++i) {
    if (!(thresholds[i] >= 0.0 && thresholds[i] <= 1.0)) throw Error("thresholds must lie in [0,1]");
    if (i > 0 && !(thresholds[i] > thresholds[i - 1])) throw Error("thresholds must be strictly increasing");
  }
  std::vector<std::vector<CaseEvaluation>> per_case;
  for (const SweepCase& c : cases) {
    if (!c.prob || !c.gt) throw Error("threshold_sweep: case without probability map or ground truth");
    per_case.push_back(evaluate_thresholds(*c.prob, *c.gt, thresholds, rules, c.subtract));
  }
  return select_threshold(per_case, thresholds);
}

}  // namespace flairkit
