#pragma once

#include "flairkit/grid_ops.hpp"
#include "flairkit/volume.hpp"

namespace flairkit {

enum class Interpolation { Linear, Nearest };

enum class NormalizeMode { ZScore, MeanOnly };

struct PreprocessConfig {
  Vec3 target_spacing{1.0, 1.0, 1.0};
  double head_threshold_fraction = 0.02;
  int crop_margin = 2;
  double clip_low_pct = 0.0;
  double clip_high_pct = 99.5;
  NormalizeMode normalize = NormalizeMode::ZScore;
};

/// Output dims are round(dims * spacing / target), at least 1 per axis. Output
/// voxel i samples the input at continuous index i * target / spacing (shared
/// origin); linear mode clamps to the edge.
ScalarVolume resample_isotropic(const ScalarVolume& volume, const Vec3& target_spacing,
                                Interpolation interpolation = Interpolation::Linear);

/// Nearest-neighbour resampling onto an explicit output lattice (same origin).
ScalarVolume resample_to(const ScalarVolume& volume, const Geometry& target, Interpolation interpolation);
BinaryMask resample_to(const BinaryMask& mask, const Geometry& target);

Geometry resampled_geometry(const Geometry& g, const Vec3& target_spacing);

struct HeadCrop {
  ScalarVolume volume;
  CropBox box;
};

/// Tight box around voxels brighter than threshold_fraction * max, grown by
/// `margin` and clamped to the volume. Returns the full volume when nothing
/// exceeds the threshold.
HeadCrop crop_to_head(const ScalarVolume& volume, double threshold_fraction = 0.02, int margin = 2);

ScalarVolume clip_intensities(const ScalarVolume& volume, double low_pct = 0.0, double high_pct = 99.5);

/// Standardizes the nonzero voxels; zeros stay exactly zero.
ScalarVolume normalize_nonzero(const ScalarVolume& volume, NormalizeMode mode = NormalizeMode::ZScore);

struct PreprocMeta {
  Geometry original;
  Geometry resampled;
  CropBox crop;
  double clip_low = 0.0;
  double clip_high = 0.0;
  double nonzero_mean = 0.0;
  double nonzero_std = 1.0;
};

struct Preprocessed {
  ScalarVolume volume;
  PreprocMeta meta;
};

/// resample -> crop_to_head -> clip -> normalize_nonzero.
Preprocessed preprocess_pipeline(const ScalarVolume& volume, const PreprocessConfig& config = {});

/// Sends a mask in original space through the same resample+crop as the volume.
BinaryMask map_mask_forward(const BinaryMask& mask, const PreprocMeta& meta);

/// Brings a mask in preprocessed space back onto the original lattice.
BinaryMask map_mask_inverse(const BinaryMask& mask, const PreprocMeta& meta);

}  // namespace flairkit
