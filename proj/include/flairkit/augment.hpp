#pragma once

#include "flairkit/rng.hpp"
#include "flairkit/volume.hpp"

namespace flairkit {

/// Training-time augmentation parameters. Every transform fires independently
/// with per_transform_probability.
struct AugmentConfig {
  Index3 crop_size{128, 128, 144};
  std::array<double, 2> rotation_range_deg{-20.0, 20.0};
  std::array<bool, 3> rotation_axes{true, true, true};
  std::array<bool, 3> flip_axes{true, true, true};
  double zoom_max = 0.15;
  double translate_max = 0.20;  // fraction of the axis length
  double intensity_scale_shift_max = 0.10;
  double noise_std_max = 0.10;
  std::array<double, 2> gamma_range{0.5, 2.0};
  Index3 patch_size{10, 10, 10};
  int patch_max_count = 75;
  double per_transform_probability = 0.5;
  std::uint64_t seed = 0;

  /// Throws Error on empty ranges or probabilities outside [0,1].
  void validate() const;
};

struct Sample {
  ScalarVolume volume;
  BinaryMask mask;
};

/// Pads with zeros (symmetrically) to at least `size`, then cuts the same
/// uniformly drawn window from volume and mask. Draws one uniform_int per axis
/// (x, y, z).
Sample random_crop(const ScalarVolume& volume, const BinaryMask& mask, const Index3& size, CounterRng& rng);

ScalarVolume flip(const ScalarVolume& volume, int axis);
BinaryMask flip(const BinaryMask& mask, int axis);

/// Rotation, per-axis flips, zoom, translation. Draw order:
///   rotation: bernoulli; if taken: axis (uniform_int over enabled axes), angle
///   flip: bernoulli per enabled axis x, y, z
///   zoom: bernoulli; if taken: factor in [1 - zoom_max, 1 + zoom_max]
///   translate: bernoulli; if taken: one fraction per axis x, y, z
/// Rotation, zoom and translation are composed into one resampling about the
/// volume centre (linear for the volume, nearest for the mask, zero outside).
Sample apply_geometric(const Sample& sample, const AugmentConfig& config, CounterRng& rng);

/// Scale, shift, gaussian noise, gamma, patch inversion/dropout. Draw order:
///   scale: bernoulli; if taken: factor 1 + u, u in [-max, max]
///   shift: bernoulli; if taken: offset u * (max - min of the volume)
///   noise: bernoulli; if taken: sigma in [0, noise_std_max], then one normal
///          per voxel in x-fastest order
///   gamma: bernoulli; if taken: gamma in gamma_range, applied on the min-max
///          normalized copy and mapped back
///   patches: bernoulli; if taken: mode (0 dropout, 1 inversion), count in
///          [1, patch_max_count], then per patch start x, y, z
ScalarVolume apply_intensity(const ScalarVolume& volume, const AugmentConfig& config, CounterRng& rng);

/// Sets every voxel of patches of patch_size whose start corners are given.
ScalarVolume patch_dropout(const ScalarVolume& volume, const std::vector<Index3>& starts, const Index3& patch_size);
/// v -> 2 * patch_mean - v inside each patch.
ScalarVolume patch_inversion(const ScalarVolume& volume, const std::vector<Index3>& starts,
                             const Index3& patch_size);

ScalarVolume apply_gamma(const ScalarVolume& volume, double gamma);

/// random_crop -> apply_geometric -> apply_intensity with CounterRng(config.seed).
Sample augment(const ScalarVolume& volume, const BinaryMask& mask, const AugmentConfig& config);

}  // namespace flairkit
