#include <doctest.h>

#include "flairkit/metrics.hpp"
#include "flairkit/oracle.hpp"
#include "flairkit/phantom.hpp"
#include "helpers.hpp"

using namespace flairkit;
using namespace testing;

namespace {

BinaryMask with_count(const Geometry& g, std::int64_t start, std::int64_t count) {
  BinaryMask m(g);
  for (std::int64_t n = start; n < start + count; ++n) m[n] = 1;
  return m;
}

ObjectScores score(const BinaryMask& gt, const BinaryMask& pred, const ObjectRules& rules = {}) {
  const auto gcc = connected_components(gt), pcc = connected_components(pred);
  return object_scores(gcc, pcc, pair_components(gcc, pcc), classify_case(gt, pred), rules);
}

}  // namespace

TEST_SUITE("metrics") {
  TEST_CASE("voxelwise dice") {
    const Geometry g = geom(20, 20, 20);
    const BinaryMask a = with_count(g, 0, 100);
    CHECK(voxelwise_dice(a, a) == 1.0);
    CHECK(voxelwise_dice(a, with_count(g, 100, 100)) == 0.0);
    CHECK(voxelwise_dice(a, with_count(g, 50, 100)) == 0.5);
    CHECK(voxelwise_dice(BinaryMask(g), BinaryMask(g)) == 1.0);
    CHECK_THROWS_AS(voxelwise_dice(a, BinaryMask(geom(20, 20, 19))), GeometryMismatch);
  }

  TEST_CASE("classification rules") {
    CHECK(classify(0.0, 0.05, 0.0).outcome == Outcome::TN);
    CHECK(classify(5.0, 5.0, 0.002).outcome == Outcome::TP);
    CHECK(classify(5.0, 5.0, 0.0).outcome == Outcome::FN);
    CHECK(classify(5.0, 0.1, 0.5).outcome == Outcome::FN);  // 0.1 mL is not positive
    CHECK(classify(0.1, 3.0, 0.0).outcome == Outcome::FP);
    CHECK(classify(5.0, 5.0, 0.001).outcome == Outcome::TP);

    const Geometry g = geom(40, 40, 40);
    const BinaryMask gt = with_count(g, 0, 5000);
    CHECK(classify_case(BinaryMask(g), with_count(g, 0, 50)).outcome == Outcome::TN);
    const auto tp = classify_case(gt, with_count(g, 4990, 5000));
    CHECK(tp.outcome == Outcome::TP);
    CHECK(tp.voxel_dice == 0.002);
    CHECK(classify_case(gt, with_count(g, 5000, 5000)).outcome == Outcome::FN);
  }

  TEST_CASE("classification partitions every case") {
    std::mt19937_64 rng(4);
    std::uniform_real_distribution<double> ml(0.0, 0.3), d(0.0, 0.01);
    for (int t = 0; t < 500; ++t) {
      const auto c = classify(ml(rng), ml(rng), d(rng));
      const int hits = (c.outcome == Outcome::TP) + (c.outcome == Outcome::FP) + (c.outcome == Outcome::FN) +
                       (c.outcome == Outcome::TN);
      CHECK(hits == 1);
    }
  }

  TEST_CASE("detection rate") {
    std::vector<Outcome> o(9, Outcome::TP);
    o.push_back(Outcome::FN);
    o.push_back(Outcome::TN);
    o.push_back(Outcome::FP);
    CHECK(*detection_rate(std::span<const Outcome>(o)) == doctest::Approx(90.0));
    const std::vector<Outcome> tn(4, Outcome::TN);
    CHECK_FALSE(detection_rate(std::span<const Outcome>(tn)).has_value());
    std::vector<Outcome> big(602, Outcome::TP);
    big.resize(614, Outcome::FN);
    CHECK(std::abs(*detection_rate(std::span<const Outcome>(big)) - 98.05) < 0.01);
  }

  TEST_CASE("pairing") {
    const Geometry g = geom(30, 30, 30);
    const BinaryMask gt = box_mask(g, {5, 5, 5}, {15, 15, 15});
    BinaryMask two = box_mask(g, {4, 4, 4}, {8, 8, 8});
    fill_box(two, {12, 12, 12}, {16, 16, 16});
    const auto gcc = connected_components(gt), pcc = connected_components(two);
    const Pairing p = pair_components(gcc, pcc);
    REQUIRE(p.matches.size() == 1);
    CHECK(p.matches[0].preds == std::vector<std::uint32_t>{1, 2});
    CHECK(p.unmatched_pred.empty());

    BinaryMask gt2 = gt;
    fill_box(gt2, {20, 20, 20}, {25, 25, 25});
    const auto g2 = connected_components(gt2);
    const auto single = connected_components(box_mask(g, {5, 5, 5}, {9, 9, 9}));
    const Pairing q = pair_components(g2, single);
    CHECK(q.unmatched_gt() == std::vector<std::uint32_t>{2});

    const auto stray = connected_components(box_mask(g, {0, 25, 0}, {3, 28, 3}));
    CHECK(pair_components(g2, stray).unmatched_pred == std::vector<std::uint32_t>{1});
  }

  TEST_CASE("object scores") {
    const Geometry g = geom(30, 30, 30);
    const BinaryMask cube = box_mask(g, {10, 10, 10}, {16, 16, 16});
    const ObjectScores same = score(cube, cube);
    CHECK(same.dice == 1.0);
    CHECK(same.recall == 1.0);
    CHECK(same.precision == 1.0);
    CHECK(same.hd95_mm == 0.0);

    BinaryMask pair = cube;
    fill_box(pair, {20, 20, 20}, {26, 26, 26});
    const ObjectScores half = score(pair, cube);
    CHECK(half.dice == 0.5);
    CHECK(half.recall == 0.5);
    CHECK(half.precision == 1.0);  // missed GT does not enter precision

    const ObjectScores grown = score(cube, dilate(cube, 1));
    CHECK(grown.recall == 1.0);
    CHECK(grown.precision < 1.0);
    CHECK(grown.precision == doctest::Approx(216.0 / (216.0 + 6 * 36)));

    BinaryMask stray = cube;
    fill_box(stray, {0, 0, 0}, {4, 4, 4});  // 64 voxels = 0.064 mL, unmatched
    const ObjectScores penalized = score(cube, stray);
    CHECK(penalized.dice == 1.0);
    CHECK(penalized.precision == 0.5);

    BinaryMask tiny = cube;
    fill_box(tiny, {0, 0, 0}, {3, 3, 3});  // 27 voxels, below 0.05 mL
    CHECK(score(cube, tiny).precision == 1.0);

    CHECK_THROWS_AS(score(cube, BinaryMask(g)), Error);
  }

  TEST_CASE("volume-weighted object averaging") {
    const Geometry g = geom(40, 40, 40);
    BinaryMask gt = box_mask(g, {2, 2, 2}, {12, 12, 12});  // 1000 voxels
    fill_box(gt, {20, 20, 20}, {25, 25, 25});             // 125 voxels
    const BinaryMask pred = box_mask(g, {2, 2, 2}, {12, 12, 12});
    ObjectRules weighted;
    weighted.weighting = ObjectWeighting::Volume;
    CHECK(score(gt, pred, weighted).dice == doctest::Approx(1000.0 / 1125.0));
    CHECK(score(gt, pred).dice == 0.5);
  }

  TEST_CASE("hd95") {
    const Geometry g = geom(20, 20, 20);
    const BinaryMask cube = box_mask(g, {5, 5, 5}, {12, 12, 12});
    CHECK(hd95(cube, cube) == 0.0);
    BinaryMask a(g), b(g);
    a.at(3, 7, 7) = 1;
    b.at(8, 7, 7) = 1;
    CHECK(hd95(a, b) == 5.0);
    CHECK_THROWS_AS(hd95(a, BinaryMask(g)), Error);
  }

  TEST_CASE("hd95 is symmetric and scales with spacing") {
    std::mt19937_64 rng(6);
    for (int t = 0; t < 20; ++t) {
      const BinaryMask a = random_mask(geom(14, 12, 10), 0.2, rng);
      const BinaryMask b = random_mask(geom(14, 12, 10), 0.2, rng);
      CHECK(hd95(a, b) == hd95(b, a));
      const BinaryMask a3(geom(14, 12, 10, {3, 3, 3}), std::vector<std::uint8_t>(a.values().begin(), a.values().end()));
      const BinaryMask b3(geom(14, 12, 10, {3, 3, 3}), std::vector<std::uint8_t>(b.values().begin(), b.values().end()));
      CHECK(hd95(a3, b3) == doctest::Approx(3 * hd95(a, b)).epsilon(1e-12));
    }
  }

  TEST_CASE("hd95 agrees with the oracle on anisotropic lattices") {
    std::mt19937_64 rng(8);
    for (int t = 0; t < 40; ++t) {
      const Geometry g = geom(13, 11, 9, {0.7, 0.9, 2.5});
      const BinaryMask a = random_mask(g, 0.15, rng), b = random_mask(g, 0.3, rng);
      if (!count_set(a) || !count_set(b)) continue;
      CHECK(std::abs(hd95(a, b) - oracle::hd95(a, b)) <= 1e-9);
    }
  }

  TEST_CASE("volume delta") {
    const VolumeDelta over = volume_delta(10.0, 13.0);
    CHECK(over.direction == Direction::Over);
    CHECK(over.delta_ml == 3.0);
    const VolumeDelta same = volume_delta(4.0, 4.0);
    CHECK(same.direction == Direction::Exact);
    CHECK(same.delta_ml == 0.0);
    CHECK(volume_delta(4.0, 1.5).direction == Direction::Under);
    CHECK(parse_direction(to_string(Direction::Under)) == Direction::Under);
    CHECK(parse_outcome(to_string(Outcome::FN)) == Outcome::FN);
  }
}
