#include "flairkit/volume.hpp"

#include <algorithm>
#include <cmath>

namespace flairkit {

namespace {

constexpr double kSpacingTolerance = 1e-6;
constexpr double kOriginTolerance = 1e-3;

std::string describe(const Geometry& g) {
  return "[" + std::to_string(g.dims[0]) + "x" + std::to_string(g.dims[1]) + "x" +
         std::to_string(g.dims[2]) + "]";
}

}  // namespace

void Geometry::validate() const {
  for (int a = 0; a < 3; ++a) {
    if (dims[a] <= 0) throw Error("dims must be positive on every axis, got " + describe(*this));
    if (!(spacing[a] > 0.0) || !std::isfinite(spacing[a])) {
      throw Error("spacing must be positive and finite on every axis");
    }
    if (!std::isfinite(origin[a])) throw Error("origin must be finite");
  }
}

bool Geometry::same_lattice(const Geometry& other) const {
  if (dims != other.dims) return false;
  for (int a = 0; a < 3; ++a) {
    if (std::abs(spacing[a] - other.spacing[a]) > kSpacingTolerance * std::max(1.0, spacing[a])) {
      return false;
    }
    if (std::abs(origin[a] - other.origin[a]) > kOriginTolerance) return false;
  }
  return true;
}

void require_same_geometry(const Geometry& a, const Geometry& b, std::string_view what) {
  if (!a.same_lattice(b)) {
    throw GeometryMismatch(std::string(what) + ": geometry mismatch " + describe(a) + " vs " +
                           describe(b));
  }
}

void validate(const ScalarVolume& volume) {
  for (float v : volume.values()) {
    if (!std::isfinite(v)) throw Error("scalar volume contains a non-finite value");
  }
}

void validate(const BinaryMask& mask) {
  for (std::uint8_t v : mask.values()) {
    if (v > 1) throw Error("binary mask contains a value outside {0,1}");
  }
}

void validate(const ProbabilityMap& prob) {
  for (float v : prob.values()) {
    if (!(v >= 0.f && v <= 1.f)) throw Error("probability map contains a value outside [0,1]");
  }
}

double voxel_volume_ml(const Vec3& spacing) {
  return spacing[0] * spacing[1] * spacing[2] / 1000.0;
}

std::int64_t count_set(const BinaryMask& mask) {
  const auto v = mask.values();
  return std::count_if(v.begin(), v.end(), [](std::uint8_t x) { return x != 0; });
}

double mask_volume_ml(const BinaryMask& mask) {
  return static_cast<double>(count_set(mask)) * voxel_volume_ml(mask.spacing());
}

ProbabilityMap to_probability(const BinaryMask& mask) {
  ProbabilityMap out(mask.geometry());
  std::transform(mask.values().begin(), mask.values().end(), out.values().begin(),
                 [](std::uint8_t x) { return x ? 1.f : 0.f; });
  return out;
}

ScalarVolume to_scalar(const BinaryMask& mask) {
  ScalarVolume out(mask.geometry());
  std::transform(mask.values().begin(), mask.values().end(), out.values().begin(),
                 [](std::uint8_t x) { return static_cast<float>(x); });
  return out;
}

ScalarVolume to_scalar(const ProbabilityMap& prob) {
  return ScalarVolume(prob.geometry(), std::vector<float>(prob.values().begin(), prob.values().end()));
}

BinaryMask nonzero_mask(const ScalarVolume& volume) {
  BinaryMask out(volume.geometry());
  std::transform(volume.values().begin(), volume.values().end(), out.values().begin(),
                 [](float x) -> std::uint8_t { return x != 0.f; });
  return out;
}

}  // namespace flairkit
