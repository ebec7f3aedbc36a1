#include <doctest.h>

#include "flairkit/components.hpp"
#include "flairkit/postprocess.hpp"
#include "helpers.hpp"

using namespace flairkit;
using namespace testing;

namespace {

bool subset(const BinaryMask& a, const BinaryMask& b) {
  for (std::size_t n = 0; n < a.size(); ++n)
    if (a[static_cast<std::int64_t>(n)] && !b[static_cast<std::int64_t>(n)]) return false;
  return true;
}

}  // namespace

TEST_SUITE("postprocess") {
  TEST_CASE("apply_brain_mask") {
    const Geometry g = geom(10, 10, 10);
    const ProbabilityMap p(g, 0.6f);
    CHECK(apply_brain_mask(p, BinaryMask(g, 1)) == p);
    const ProbabilityMap zero = apply_brain_mask(p, BinaryMask(g));
    CHECK(std::all_of(zero.values().begin(), zero.values().end(), [](float x) { return x == 0.f; }));
    const ProbabilityMap half = apply_brain_mask(p, box_mask(g, {0, 0, 0}, {5, 10, 10}));
    std::size_t zeroed = 0;
    for (float x : half.values()) zeroed += x == 0.f;
    CHECK(zeroed == 500);
    CHECK(half.at(4, 9, 9) == 0.6f);
    CHECK(half.at(5, 0, 0) == 0.f);
    CHECK_THROWS_AS(apply_brain_mask(p, BinaryMask(geom(10, 10, 9))), GeometryMismatch);
  }

  TEST_CASE("binarize is strict") {
    ProbabilityMap p(geom(2, 1, 1));
    p[1] = 0.4f;
    const BinaryMask m = binarize(p, 0.0);
    CHECK(m[0] == 0);
    CHECK(m[1] == 1);
    CHECK(count_set(binarize(ProbabilityMap(geom(3, 3, 3), 1.f), 1.0)) == 0);
    const ProbabilityMap c(geom(3, 3, 3), 0.6f);
    CHECK(count_set(binarize(c, 0.5)) == 27);
    CHECK(count_set(binarize(c, 0.7)) == 0);
    CHECK_THROWS_AS(binarize(c, 1.2), Error);
  }

  TEST_CASE("default threshold grid") {
    const auto t = default_thresholds();
    REQUIRE(t.size() == 10);
    CHECK(t.front() == doctest::Approx(0.05));
    CHECK(t.back() == doctest::Approx(0.95));
    for (std::size_t i = 1; i < t.size(); ++i) CHECK(t[i] - t[i - 1] == doctest::Approx(0.1));
  }

  TEST_CASE("binarize is monotone in the threshold") {
    std::mt19937_64 rng(1);
    std::uniform_real_distribution<float> u(0.f, 1.f);
    ProbabilityMap p(geom(16, 16, 16));
    for (auto& x : p.values()) x = u(rng);
    const auto t = default_thresholds();
    for (std::size_t i = 1; i < t.size(); ++i) CHECK(subset(binarize(p, t[i]), binarize(p, t[i - 1])));
  }

  TEST_CASE("connected components") {
    const Geometry g = geom(12, 12, 12);
    BinaryMask two = box_mask(g, {0, 0, 0}, {3, 3, 3});
    fill_box(two, {6, 6, 6}, {10, 8, 7});
    const auto cc = connected_components(two);
    REQUIRE(cc.count() == 2);
    CHECK(cc.sizes[0] == 27);
    CHECK(cc.sizes[1] == 8);

    BinaryMask diag(geom(3, 3, 3));
    diag.at(0, 0, 0) = 1;
    diag.at(1, 1, 1) = 1;
    CHECK(connected_components(diag, Connectivity::TwentySix).count() == 1);
    CHECK(connected_components(diag, Connectivity::Six).count() == 2);
    CHECK(connected_components(BinaryMask(g)).count() == 0);
  }

  TEST_CASE("labels follow raster order of first voxel") {
    BinaryMask m(geom(6, 6, 1));
    m.at(5, 0, 0) = 1;  // first in raster order
    m.at(0, 3, 0) = 1;
    m.at(0, 4, 0) = 1;
    const auto cc = connected_components(m);
    CHECK(cc.labels[m.geometry().index(5, 0, 0)] == 1);
    CHECK(cc.labels[m.geometry().index(0, 4, 0)] == 2);
  }

  TEST_CASE("U-shaped component merges across passes") {
    BinaryMask u(geom(5, 5, 1));
    for (std::int64_t j = 0; j < 5; ++j) {
      u.at(0, j, 0) = 1;
      u.at(4, j, 0) = 1;
    }
    for (std::int64_t i = 0; i < 5; ++i) u.at(i, 4, 0) = 1;
    CHECK(connected_components(u, Connectivity::Six).count() == 1);
  }

  TEST_CASE("component filter rules") {
    const Geometry g = geom(30, 30, 30);
    BinaryMask small = box_mask(g, {0, 0, 0}, {4, 5, 2});  // 40 voxels = 0.04 mL over 2 slices
    CHECK(count_set(filter_small_components(small)) == 0);

    BinaryMask flat = box_mask(g, {0, 0, 5}, {10, 12, 6});  // 120 voxels in one slice
    CHECK(count_set(filter_small_components(flat)) == 0);

    BinaryMask kept = box_mask(g, {10, 10, 10}, {20, 17, 13});  // 210 voxels over 3 slices
    CHECK(filter_small_components(kept) == kept);

    // Exactly 0.05 mL survives ("lower than 0.05 mL" is removed).
    BinaryMask edge = box_mask(g, {0, 0, 0}, {5, 5, 2});
    CHECK(count_set(filter_small_components(edge)) == 50);

    // Anisotropic spacing: 7 voxels of 8 mm^3 = 0.056 mL spanning 2 slices.
    BinaryMask coarse(geom(10, 10, 10, {2, 2, 2}));
    fill_box(coarse, {0, 0, 0}, {1, 7, 2});
    CHECK(count_set(filter_small_components(coarse)) == 14);

    ComponentFilter along_x;
    along_x.slice_axis = 0;
    BinaryMask thin_x = box_mask(g, {3, 0, 0}, {4, 10, 10});
    CHECK(count_set(filter_small_components(thin_x)) == 100);
    CHECK(count_set(filter_small_components(thin_x, along_x)) == 0);
  }

  TEST_CASE("filter never adds voxels and is idempotent") {
    std::mt19937_64 rng(2);
    for (int t = 0; t < 30; ++t) {
      const BinaryMask m = random_mask(geom(20, 20, 12, {1, 1, 1.5}), 0.25, rng);
      const BinaryMask once = filter_small_components(m);
      CHECK(subset(once, m));
      CHECK(filter_small_components(once) == once);
    }
  }

  TEST_CASE("threshold sweep") {
    const Geometry g = geom(20, 20, 20);
    const BinaryMask gt = box_mask(g, {6, 6, 6}, {14, 14, 14});
    const auto grid = default_thresholds();

    const ProbabilityMap exact = to_probability(gt);
    const SweepCase perfect[] = {{&exact, &gt, nullptr}};
    const SweepResult r1 = threshold_sweep(perfect, grid);
    CHECK(r1.best_threshold == grid.front());
    for (const auto& s : r1.scores) CHECK(s.mean_dice == 1.0);

    ProbabilityMap graded(g, 0.30f);
    for (std::size_t n = 0; n < gt.size(); ++n)
      if (gt[static_cast<std::int64_t>(n)]) graded[static_cast<std::int64_t>(n)] = 0.45f;
    const SweepCase graded_case[] = {{&graded, &gt, nullptr}};
    const SweepResult r2 = threshold_sweep(graded_case, grid);
    CHECK(r2.best_threshold >= 0.30);
    CHECK(r2.best_threshold < 0.45);
    CHECK(r2.best_index == 3);
    CHECK(r2.scores[3].mean_dice == 1.0);
    CHECK(r2.scores[4].mean_dice == 0.0);  // 0.45 is not > 0.45: nothing predicted
    CHECK(r2.scores[4].detection_rate == 0.0);

    const ProbabilityMap zeros(g);
    const SweepCase missed[] = {{&zeros, &gt, nullptr}};
    const SweepResult r3 = threshold_sweep(missed, grid);
    CHECK(r3.best_threshold == grid.front());
    for (const auto& s : r3.scores) CHECK(s.mean_dice == 0.0);
  }

  TEST_CASE("threshold sweep input validation") {
    const Geometry g = geom(4, 4, 4);
    const BinaryMask gt(g);
    const ProbabilityMap p(g);
    const SweepCase one[] = {{&p, &gt, nullptr}};
    CHECK_THROWS_AS(threshold_sweep(std::span<const SweepCase>(), default_thresholds()), Error);
    const std::vector<double> unsorted{0.5, 0.2};
    CHECK_THROWS_AS(threshold_sweep(one, unsorted), Error);
    const std::vector<double> outside{0.5, 1.5};
    CHECK_THROWS_AS(threshold_sweep(one, outside), Error);
  }

  TEST_CASE("selection score") {
    CaseEvaluation tn;
    tn.classification.outcome = Outcome::TN;
    CHECK(selection_score(tn) == 1.0);
    CaseEvaluation fp;
    fp.classification.outcome = Outcome::FP;
    CHECK(selection_score(fp) == 0.0);
  }

  TEST_CASE("tumor subtraction happens before filtering") {
    const Geometry g = geom(20, 20, 20);
    const BinaryMask snfh = box_mask(g, {2, 2, 2}, {12, 12, 12});
    BinaryMask tumor = box_mask(g, {4, 4, 4}, {10, 10, 10});
    // Prediction covers SNFH plus tumor core.
    const ProbabilityMap prob = to_probability(snfh);
    const double t[] = {0.5};
    const auto with = evaluate_thresholds(prob, snfh, t, EvaluationRules{}, &tumor);
    CHECK(with[0].classification.pred_ml == doctest::Approx((1000 - 216) * 0.001));
  }
}
