#include <doctest.h>

#include <numbers>
#include <set>

#include "flairkit/metrics.hpp"
#include "flairkit/oracle.hpp"
#include "flairkit/postprocess.hpp"
#include "flairkit/phantom.hpp"
#include "helpers.hpp"

using namespace flairkit;
using namespace testing;

namespace {

PhantomSpec sphere_spec(double r, std::uint64_t seed = 0, double noise = 0.0) {
  PhantomSpec s;
  s.geometry = geom(32, 32, 32);
  s.ellipsoids.push_back({{16, 16, 16}, {r, r, r}, 1.0});
  s.noise_sigma = noise;
  s.seed = seed;
  return s;
}

}  // namespace

TEST_SUITE("phantom") {
  TEST_CASE("rasterized sphere volume") {
    const Phantom p = make_phantom(sphere_spec(6.0));
    const double analytic = 4.0 / 3.0 * std::numbers::pi * 216.0;
    CHECK(std::abs(static_cast<double>(count_set(p.mask)) - analytic) / analytic < 0.05);
    CHECK(p.volume.at(16, 16, 16) == 1.f);
    CHECK(p.volume.at(0, 0, 0) == 0.f);
  }

  TEST_CASE("empty spec") {
    PhantomSpec s;
    s.geometry = geom(8, 8, 8);
    const Phantom p = make_phantom(s);
    CHECK(count_set(p.mask) == 0);
    CHECK(std::all_of(p.volume.values().begin(), p.volume.values().end(), [](float x) { return x == 0.f; }));
  }

  TEST_CASE("bit-deterministic per seed") {
    const Phantom a = make_phantom(sphere_spec(5, 42, 0.1)), b = make_phantom(sphere_spec(5, 42, 0.1));
    CHECK(a.volume == b.volume);
    CHECK(a.mask == b.mask);
    CHECK_FALSE(make_phantom(sphere_spec(5, 43, 0.1)).volume == a.volume);
  }

  TEST_CASE("centre outside the extent is rejected") {
    PhantomSpec s = sphere_spec(3);
    s.ellipsoids[0].center_mm = {40, 0, 0};
    CHECK_THROWS_AS(make_phantom(s), Error);
  }

  TEST_CASE("spec JSON round trip") {
    PhantomSpec s = sphere_spec(4, 9, 0.05);
    s.geometry.spacing = {1, 1, 2};
    const PhantomSpec back = nlohmann::json(s).get<PhantomSpec>();
    CHECK(make_phantom(back).volume == make_phantom(s).volume);
  }

  TEST_CASE("perturbations") {
    BinaryMask dot(geom(16, 16, 16));
    dot.at(4, 8, 8) = 1;
    CHECK(hd95(dot, binarize(perturb_prediction(dot, Perturbation::shift_by({5, 0, 0})), 0.5)) == 5.0);

    const BinaryMask cube = box_mask(geom(20, 20, 20), {5, 5, 5}, {10, 10, 10});
    const BinaryMask same = binarize(perturb_prediction(cube, Perturbation::identity()), 0.5);
    CHECK(same == cube);
    CHECK(hd95(cube, same) == 0.0);
    CHECK(count_set(dilate(cube, 1)) == 125 + 6 * 25);
    CHECK(count_set(erode(cube, 1)) == 27);
    CHECK(count_set(shift(cube, {18, 0, 0})) == 0);

    BinaryMask two = cube;
    fill_box(two, {12, 12, 12}, {17, 17, 17});
    const BinaryMask dropped = binarize(perturb_prediction(two, Perturbation::drop_component(1)), 0.5);
    CHECK(dropped == cube);
    const auto gcc = connected_components(two), pcc = connected_components(dropped);
    CHECK(object_scores(gcc, pcc, pair_components(gcc, pcc), classify_case(two, dropped)).dice == 0.5);

    const BinaryMask blob = binarize(perturb_prediction(cube, Perturbation::add_blob({}), 5), 0.5);
    CHECK(count_set(blob) > count_set(cube));
    CHECK(blob == binarize(perturb_prediction(cube, Perturbation::add_blob({}), 5), 0.5));
  }

  TEST_CASE("oracle examples") {
    std::mt19937_64 rng(21);
    const BinaryMask m = random_mask(geom(10, 10, 10), 0.3, rng);
    CHECK(oracle::dice(m, m) == 1.0);
    CHECK(oracle::hd95(m, m) == 0.0);
    CHECK(oracle::same_partition(oracle::components(m, 26), connected_components(m).labels));

    BinaryMask diag(geom(3, 3, 3));
    diag.at(0, 0, 0) = 1;
    diag.at(1, 1, 1) = 1;
    diag.at(2, 2, 1) = 1;
    const auto six = oracle::components(diag, 6), full = oracle::components(diag, 26);
    CHECK(std::set<std::uint32_t>(six.begin(), six.end()).size() == 4);   // background + 3
    CHECK(std::set<std::uint32_t>(full.begin(), full.end()).size() == 2);

    CHECK_THROWS_AS(oracle::dice(BinaryMask(geom(33, 32, 32)), BinaryMask(geom(33, 32, 32))), Error);
    CHECK_FALSE(oracle::same_partition({0, 1, 1}, {0, 1, 2}));
    CHECK(oracle::same_partition({0, 1, 2}, {0, 7, 3}));
  }

  TEST_CASE("production metrics agree with the oracles on 16^3 pairs") {
    std::mt19937_64 rng(22);
    std::uniform_real_distribution<double> density(0.02, 0.4);
    for (int t = 0; t < 60; ++t) {
      const Geometry g = geom(16, 16, 16);
      const BinaryMask a = random_mask(g, density(rng), rng), b = random_mask(g, density(rng), rng);
      CHECK(voxelwise_dice(a, b) == oracle::dice(a, b));
      CHECK(std::abs(hd95(a, b) - oracle::hd95(a, b)) <= 1e-9);
      CHECK(oracle::same_partition(oracle::components(a, 6),
                                   connected_components(a, Connectivity::Six).labels));
    }
  }
}
