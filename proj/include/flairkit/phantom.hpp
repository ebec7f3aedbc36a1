#pragma once

#include <json.hpp>

#include "flairkit/volume.hpp"

namespace flairkit {

struct Ellipsoid {
  Vec3 center_mm{0, 0, 0};
  Vec3 radii_mm{1, 1, 1};
  double intensity = 1.0;
};

struct PhantomSpec {
  Geometry geometry;
  std::vector<Ellipsoid> ellipsoids;
  double noise_sigma = 0.0;
  std::uint64_t seed = 0;
};

struct Phantom {
  ScalarVolume volume;
  BinaryMask mask;
};

/// Rasterizes ellipsoids at voxel centres (later ellipsoids paint over earlier
/// ones in the intensity volume) and adds seeded gaussian noise, one normal
/// draw per voxel in x-fastest order. Throws Error if an ellipsoid centre
/// lies outside the volume extent.
Phantom make_phantom(const PhantomSpec& spec);

/// Indicator of a single ellipsoid on the given lattice.
BinaryMask rasterize(const Ellipsoid& e, const Geometry& g);

struct Perturbation {
  enum class Kind { Identity, Dilate, Erode, Shift, DropComponent, AddBlob };
  Kind kind = Kind::Identity;
  int amount = 0;          // dilate/erode iterations, or 0-based component index
  Index3 shift{0, 0, 0};   // voxels
  Ellipsoid blob;

  static Perturbation identity() { return {}; }
  static Perturbation dilate(int k) { return {Kind::Dilate, k, {}, {}}; }
  static Perturbation erode(int k) { return {Kind::Erode, k, {}, {}}; }
  static Perturbation shift_by(const Index3& v) { return {Kind::Shift, 0, v, {}}; }
  static Perturbation drop_component(int i) { return {Kind::DropComponent, i, {}, {}}; }
  static Perturbation add_blob(const Ellipsoid& e) { return {Kind::AddBlob, 0, {}, e}; }
};

/// Probability map equal to 1 on the perturbed mask and 0 elsewhere.
/// Dilation/erosion use the 6-neighbourhood per iteration; shifted voxels that
/// leave the volume are dropped; components are counted at 26-connectivity in
/// label order. For AddBlob with a zero radius, a sphere of radius 3 mm is
/// placed at a seeded random position instead.
ProbabilityMap perturb_prediction(const BinaryMask& gt, const Perturbation& perturbation, std::uint64_t seed = 0);

BinaryMask dilate(const BinaryMask& mask, int iterations);
BinaryMask erode(const BinaryMask& mask, int iterations);
BinaryMask shift(const BinaryMask& mask, const Index3& by);

void to_json(nlohmann::json& j, const PhantomSpec& spec);
void from_json(const nlohmann::json& j, PhantomSpec& spec);

}  // namespace flairkit
