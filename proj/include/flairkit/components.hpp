#pragma once

#include "flairkit/volume.hpp"

namespace flairkit {

enum class Connectivity { Six = 6, TwentySix = 26 };

/// Labels 1..count in raster order of each component's first voxel; 0 is
/// background. sizes[l - 1] is the voxel count of label l.
struct LabeledComponents {
  Geometry geometry;
  std::vector<std::uint32_t> labels;
  std::vector<std::int64_t> sizes;

  std::size_t count() const { return sizes.size(); }
};

/// Two-pass union-find labeling.
LabeledComponents connected_components(const BinaryMask& mask, Connectivity connectivity = Connectivity::TwentySix);

/// Mask of all voxels with a nonzero label.
BinaryMask to_mask(const LabeledComponents& components);

/// Mask of the voxels whose label has keep[label] set (keep[0] is ignored).
BinaryMask select_labels(const LabeledComponents& components, const std::vector<bool>& keep);

struct ComponentFilter {
  double min_ml = 0.05;
  int min_consecutive_slices = 2;
  int slice_axis = 2;
  Connectivity connectivity = Connectivity::TwentySix;
};

/// Drops components below min_ml or spanning fewer than min_consecutive_slices
/// along slice_axis; survivors are relabeled in order.
LabeledComponents filter_components(const LabeledComponents& components, const ComponentFilter& filter);

BinaryMask filter_small_components(const BinaryMask& mask, const ComponentFilter& filter = {});

}  // namespace flairkit
