#include "flairkit/metrics.hpp"

#include <algorithm>
#include <cmath>

#include "flairkit/distance.hpp"
#include "flairkit/stats.hpp"

namespace flairkit {

namespace {

constexpr double kMlEpsilon = 1e-12;

struct Box {
  Index3 lo{0, 0, 0};
  Index3 hi{-1, -1, -1};  // inclusive
  bool empty() const { return hi[0] < lo[0]; }
};

void grow(Box& b, const Index3& p) {
  if (b.empty()) {
    b.lo = p;
    b.hi = p;
    return;
  }
  for (int a = 0; a < 3; ++a) {
    b.lo[a] = std::min(b.lo[a], p[a]);
    b.hi[a] = std::max(b.hi[a], p[a]);
  }
}

// Boundary voxels of `mask` inside `box`, packed into a box-sized array.
std::vector<std::uint8_t> boundary_in_box(const BinaryMask& mask, const Box& box) {
  const Index3& d = mask.dims();
  const Index3 e{box.hi[0] - box.lo[0] + 1, box.hi[1] - box.lo[1] + 1, box.hi[2] - box.lo[2] + 1};
  std::vector<std::uint8_t> out(static_cast<std::size_t>(e[0] * e[1] * e[2]), 0);
  std::size_t n = 0;
  for (std::int64_t k = box.lo[2]; k <= box.hi[2]; ++k)
    for (std::int64_t j = box.lo[1]; j <= box.hi[1]; ++j)
      for (std::int64_t i = box.lo[0]; i <= box.hi[0]; ++i, ++n) {
        if (!mask.at(i, j, k)) continue;
        const bool edge = i == 0 || j == 0 || k == 0 || i == d[0] - 1 || j == d[1] - 1 || k == d[2] - 1;
        out[n] = edge || !mask.at(i - 1, j, k) || !mask.at(i + 1, j, k) || !mask.at(i, j - 1, k) ||
                 !mask.at(i, j + 1, k) || !mask.at(i, j, k - 1) || !mask.at(i, j, k + 1);
      }
  return out;
}

double weighted_mean(const std::vector<double>& values, const std::vector<double>& weights) {
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < values.size(); ++i) {
    num += weights[i] * values[i];
    den += weights[i];
  }
  return den > 0.0 ? num / den : 0.0;
}

}  // namespace

std::string to_string(Outcome outcome) {
  switch (outcome) {
    case Outcome::TP: return "TP";
    case Outcome::FP: return "FP";
    case Outcome::FN: return "FN";
    case Outcome::TN: return "TN";
  }
  return "?";
}

Outcome parse_outcome(std::string_view text) {
  if (text == "TP") return Outcome::TP;
  if (text == "FP") return Outcome::FP;
  if (text == "FN") return Outcome::FN;
  if (text == "TN") return Outcome::TN;
  throw Error("unknown outcome '" + std::string(text) + "'");
}

std::string to_string(Direction d) {
  switch (d) {
    case Direction::Over: return "over";
    case Direction::Under: return "under";
    case Direction::Exact: return "exact";
  }
  return "?";
}

Direction parse_direction(std::string_view text) {
  if (text == "over") return Direction::Over;
  if (text == "under") return Direction::Under;
  if (text == "exact") return Direction::Exact;
  throw Error("unknown direction '" + std::string(text) + "'");
}

double voxelwise_dice(const BinaryMask& a, const BinaryMask& b) {
  require_same_geometry(a.geometry(), b.geometry(), "voxelwise_dice");
  std::int64_t na = 0, nb = 0, both = 0;
  const auto va = a.values(), vb = b.values();
  for (std::size_t i = 0; i < va.size(); ++i) {
    const bool x = va[i] != 0, y = vb[i] != 0;
    na += x;
    nb += y;
    both += x && y;
  }
  if (na + nb == 0) return 1.0;
  return 2.0 * static_cast<double>(both) / static_cast<double>(na + nb);
}

CaseClassification classify(double gt_ml, double pred_ml, double voxel_dice, const DetectionRules& rules) {
  CaseClassification c{Outcome::TN, gt_ml, pred_ml, voxel_dice};
  const bool gt_pos = gt_ml > rules.positive_threshold_ml + kMlEpsilon;
  const bool pred_pos = pred_ml > rules.positive_threshold_ml + kMlEpsilon;
  if (gt_pos && pred_pos) {
    c.outcome = voxel_dice >= rules.tp_dice_min ? Outcome::TP : Outcome::FN;
  } else if (gt_pos) {
    c.outcome = Outcome::FN;
  } else if (pred_pos) {
    c.outcome = Outcome::FP;
  }
  return c;
}

CaseClassification classify_case(const BinaryMask& gt, const BinaryMask& pred, const DetectionRules& rules) {
  const double dice = voxelwise_dice(gt, pred);
  return classify(mask_volume_ml(gt), mask_volume_ml(pred), dice, rules);
}

std::optional<double> detection_rate(std::span<const Outcome> outcomes) {
  std::size_t tp = 0, fn = 0;
  for (Outcome o : outcomes) {
    tp += o == Outcome::TP;
    fn += o == Outcome::FN;
  }
  if (tp + fn == 0) return std::nullopt;
  return 100.0 * static_cast<double>(tp) / static_cast<double>(tp + fn);
}

std::optional<double> detection_rate(std::span<const CaseClassification> cases) {
  std::vector<Outcome> outcomes;
  outcomes.reserve(cases.size());
  for (const auto& c : cases) outcomes.push_back(c.outcome);
  return detection_rate(std::span<const Outcome>(outcomes));
}

std::vector<std::uint32_t> Pairing::unmatched_gt() const {
  std::vector<std::uint32_t> out;
  for (const auto& m : matches)
    if (m.preds.empty()) out.push_back(m.gt);
  return out;
}

Pairing pair_components(const LabeledComponents& gt, const LabeledComponents& pred) {
  require_same_geometry(gt.geometry, pred.geometry, "pair_components");
  Pairing p;
  p.matches.resize(gt.count());
  for (std::size_t g = 0; g < gt.count(); ++g) p.matches[g].gt = static_cast<std::uint32_t>(g + 1);

  std::vector<std::uint64_t> pairs;
  for (std::size_t n = 0; n < gt.labels.size(); ++n) {
    const std::uint32_t g = gt.labels[n];
    if (g == 0) continue;
    const std::uint32_t q = pred.labels[n];
    if (q == 0) continue;
    ++p.matches[g - 1].overlap;
    pairs.push_back((static_cast<std::uint64_t>(g) << 32) | q);
  }
  std::sort(pairs.begin(), pairs.end());
  pairs.erase(std::unique(pairs.begin(), pairs.end()), pairs.end());

  std::vector<bool> attached(pred.count() + 1, false);
  for (std::uint64_t key : pairs) {
    const auto g = static_cast<std::uint32_t>(key >> 32);
    const auto q = static_cast<std::uint32_t>(key & 0xffffffffu);
    p.matches[g - 1].preds.push_back(q);
    attached[q] = true;
  }
  for (std::size_t q = 1; q <= pred.count(); ++q)
    if (!attached[q]) p.unmatched_pred.push_back(static_cast<std::uint32_t>(q));
  return p;
}

ObjectScores object_scores(const LabeledComponents& gt, const LabeledComponents& pred, const Pairing& pairing,
                           const CaseClassification& classification, const ObjectRules& rules) {
  if (classification.outcome != Outcome::TP) {
    throw Error("object-wise scores are defined for true positive cases only (got " +
                to_string(classification.outcome) + ")");
  }
  require_same_geometry(gt.geometry, pred.geometry, "object_scores");
  const bool by_volume = rules.weighting == ObjectWeighting::Volume;

  std::vector<double> dice, recall, precision, w_gt, w_prec;
  std::vector<bool> keep_gt(gt.count() + 1, false), keep_pred(pred.count() + 1, false);
  for (const auto& m : pairing.matches) {
    const double g_size = static_cast<double>(gt.sizes[m.gt - 1]);
    std::int64_t u = 0;
    for (std::uint32_t q : m.preds) {
      u += pred.sizes[q - 1];
      keep_pred[q] = true;
    }
    const double u_size = static_cast<double>(u);
    const double inter = static_cast<double>(m.overlap);
    dice.push_back(2.0 * inter / (g_size + u_size));
    recall.push_back(inter / g_size);
    w_gt.push_back(by_volume ? g_size : 1.0);
    if (!m.preds.empty()) {
      keep_gt[m.gt] = true;
      precision.push_back(inter / u_size);
      w_prec.push_back(by_volume ? u_size : 1.0);
    }
  }
  const double voxel_ml = voxel_volume_ml(pred.geometry.spacing);
  for (std::uint32_t q : pairing.unmatched_pred) {
    const double size = static_cast<double>(pred.sizes[q - 1]);
    if (size * voxel_ml > rules.unmatched_pred_min_ml + kMlEpsilon) {
      precision.push_back(0.0);
      w_prec.push_back(by_volume ? size : 1.0);
    }
  }

  ObjectScores s;
  s.dice = weighted_mean(dice, w_gt);
  s.recall = weighted_mean(recall, w_gt);
  s.precision = weighted_mean(precision, w_prec);
  s.hd95_mm = hd95(select_labels(gt, keep_gt), select_labels(pred, keep_pred));
  s.pairing = pairing;
  return s;
}

double hd95(const BinaryMask& a, const BinaryMask& b) {
  require_same_geometry(a.geometry(), b.geometry(), "hd95");
  const Geometry& g = a.geometry();
  Box box_a, box_b;
  {
    std::int64_t n = 0;
    const Index3& d = g.dims;
    for (std::int64_t k = 0; k < d[2]; ++k)
      for (std::int64_t j = 0; j < d[1]; ++j)
        for (std::int64_t i = 0; i < d[0]; ++i, ++n) {
          if (a[n]) grow(box_a, {i, j, k});
          if (b[n]) grow(box_b, {i, j, k});
        }
  }
  if (box_a.empty() || box_b.empty()) throw Error("hd95 requires two nonempty masks");
  Box box = box_a;
  grow(box, box_b.lo);
  grow(box, box_b.hi);

  const Index3 e{box.hi[0] - box.lo[0] + 1, box.hi[1] - box.lo[1] + 1, box.hi[2] - box.lo[2] + 1};
  const auto edge_a = boundary_in_box(a, box);
  const auto edge_b = boundary_in_box(b, box);
  const auto dist_to_b = squared_edt(edge_b, e, g.spacing);
  const auto dist_to_a = squared_edt(edge_a, e, g.spacing);

  std::vector<double> pooled;
  for (std::size_t n = 0; n < edge_a.size(); ++n) {
    if (edge_a[n]) pooled.push_back(std::sqrt(dist_to_b[n]));
    if (edge_b[n]) pooled.push_back(std::sqrt(dist_to_a[n]));
  }
  return percentile_inplace(std::span<double>(pooled), 95.0);
}

VolumeDelta volume_delta(double gt_ml, double pred_ml) {
  VolumeDelta d;
  d.delta_ml = std::abs(pred_ml - gt_ml);
  d.direction = pred_ml > gt_ml ? Direction::Over : (pred_ml < gt_ml ? Direction::Under : Direction::Exact);
  return d;
}

VolumeDelta volume_delta(const BinaryMask& gt, const BinaryMask& pred) {
  require_same_geometry(gt.geometry(), pred.geometry(), "volume_delta");
  return volume_delta(mask_volume_ml(gt), mask_volume_ml(pred));
}

}  // namespace flairkit
