#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace flairkit {

using Index3 = std::array<std::int64_t, 3>;
using Vec3 = std::array<double, 3>;

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class GeometryMismatch : public Error {
 public:
  using Error::Error;
};

/// NIfTI orientation fields. Carried through load/save untouched; no
/// operation in this library interprets them.
struct Orientation {
  std::int16_t qform_code = 0;
  std::int16_t sform_code = 0;
  float quatern_b = 0.f;
  float quatern_c = 0.f;
  float quatern_d = 0.f;
  float qfac = 1.f;
  std::array<std::array<float, 4>, 3> srow{};

  bool operator==(const Orientation&) const = default;
};

/// Voxel lattice description shared by every grid type. Voxel (i,j,k) sits at
/// physical position origin + (i,j,k) * spacing (mm).
struct Geometry {
  Index3 dims{1, 1, 1};
  Vec3 spacing{1.0, 1.0, 1.0};
  Vec3 origin{0.0, 0.0, 0.0};
  std::optional<Orientation> orientation;

  std::int64_t voxel_count() const { return dims[0] * dims[1] * dims[2]; }

  // x-fastest linear index.
  std::int64_t index(std::int64_t i, std::int64_t j, std::int64_t k) const {
    return i + dims[0] * (j + dims[1] * k);
  }

  Index3 coords(std::int64_t linear) const {
    const std::int64_t i = linear % dims[0];
    const std::int64_t rest = linear / dims[0];
    return {i, rest % dims[1], rest / dims[1]};
  }

  bool contains(std::int64_t i, std::int64_t j, std::int64_t k) const {
    return i >= 0 && j >= 0 && k >= 0 && i < dims[0] && j < dims[1] && k < dims[2];
  }

  /// Throws Error if dims or spacing are not strictly positive.
  void validate() const;

  /// Same dims, and spacing/origin equal within file-precision tolerance.
  bool same_lattice(const Geometry& other) const;
};

void require_same_geometry(const Geometry& a, const Geometry& b, std::string_view what);

/// Dense voxel grid in x-fastest order. Tag distinguishes volumes that share
/// an element type but not a meaning (intensities vs. probabilities).
template <class T, class Tag>
class Grid {
 public:
  using value_type = T;

  Grid() = default;

  explicit Grid(Geometry geometry, T fill = T{}) : geometry_(std::move(geometry)) {
    geometry_.validate();
    data_.assign(static_cast<std::size_t>(geometry_.voxel_count()), fill);
  }

  Grid(Geometry geometry, std::vector<T> data)
      : geometry_(std::move(geometry)), data_(std::move(data)) {
    geometry_.validate();
    if (static_cast<std::int64_t>(data_.size()) != geometry_.voxel_count()) {
      throw Error("voxel data length " + std::to_string(data_.size()) +
                  " does not match dims product " + std::to_string(geometry_.voxel_count()));
    }
  }

  const Geometry& geometry() const { return geometry_; }
  const Index3& dims() const { return geometry_.dims; }
  const Vec3& spacing() const { return geometry_.spacing; }
  std::size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }

  T& operator[](std::int64_t n) { return data_[static_cast<std::size_t>(n)]; }
  const T& operator[](std::int64_t n) const { return data_[static_cast<std::size_t>(n)]; }

  T& at(std::int64_t i, std::int64_t j, std::int64_t k) { return (*this)[geometry_.index(i, j, k)]; }
  const T& at(std::int64_t i, std::int64_t j, std::int64_t k) const {
    return (*this)[geometry_.index(i, j, k)];
  }

  std::span<T> values() { return data_; }
  std::span<const T> values() const { return data_; }

  // Replaces origin/orientation only; dims and spacing are fixed by the data.
  void set_origin(const Vec3& origin) { geometry_.origin = origin; }
  void set_orientation(std::optional<Orientation> o) { geometry_.orientation = std::move(o); }

  bool operator==(const Grid& other) const {
    return geometry_.dims == other.geometry_.dims && data_ == other.data_;
  }

 private:
  Geometry geometry_;
  std::vector<T> data_;
};

struct ScalarTag {};
struct MaskTag {};
struct ProbabilityTag {};

using ScalarVolume = Grid<float, ScalarTag>;
using BinaryMask = Grid<std::uint8_t, MaskTag>;
using ProbabilityMap = Grid<float, ProbabilityTag>;

/// Throws Error on a non-finite intensity.
void validate(const ScalarVolume& volume);
/// Throws Error on a value outside {0,1}.
void validate(const BinaryMask& mask);
/// Throws Error on a value outside [0,1] or a NaN.
void validate(const ProbabilityMap& prob);

/// Physical volume of one voxel in mL (1 mL = 1000 mm^3).
double voxel_volume_ml(const Vec3& spacing);

std::int64_t count_set(const BinaryMask& mask);

double mask_volume_ml(const BinaryMask& mask);

/// Probability map that is 1 on set voxels and 0 elsewhere.
ProbabilityMap to_probability(const BinaryMask& mask);

ScalarVolume to_scalar(const BinaryMask& mask);
ScalarVolume to_scalar(const ProbabilityMap& prob);

/// Set where value != 0.
BinaryMask nonzero_mask(const ScalarVolume& volume);

}  // namespace flairkit
