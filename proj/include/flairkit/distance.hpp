#pragma once

#include <span>

#include "flairkit/volume.hpp"

namespace flairkit {

/// Exact squared Euclidean distance transform (Felzenszwalb-Huttenlocher lower
/// envelope, one pass per axis) with anisotropic spacing. Output is the squared
/// distance in mm^2 from every voxel of the dims-sized grid to the nearest
/// voxel with feature != 0; +inf when the grid holds no feature.
std::vector<double> squared_edt(std::span<const std::uint8_t> feature, const Index3& dims, const Vec3& spacing);

/// Set voxels with at least one unset 6-neighbour, or lying on the volume edge.
BinaryMask boundary(const BinaryMask& mask);

}  // namespace flairkit
