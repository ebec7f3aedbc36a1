#pragma once

#include <filesystem>
#include <memory>
#include <string_view>

#include "flairkit/volume.hpp"

namespace flairkit {

/// Window layout over a (possibly zero-padded) volume. Window starts are in
/// padded coordinates; padded voxel p corresponds to volume voxel p - pad_before.
struct TileGrid {
  Index3 volume_dims{};
  Index3 padded_dims{};
  Index3 pad_before{};
  Index3 patch_size{};
  Index3 stride{};
  std::vector<Index3> windows;
};

/// stride = ceil(patch * (1 - overlap)); axes shorter than the patch are padded
/// symmetrically up to the patch; the last window on each axis is clamped to end
/// at the padded edge.
TileGrid plan_tiles(const Index3& dims, const Index3& patch_size, double overlap = 0.5);

/// Stand-in for a trained network. `offset` is the volume-voxel index of the
/// patch's (0,0,0) voxel; it is negative inside symmetric padding.
class Predictor {
 public:
  virtual ~Predictor() = default;
  virtual ProbabilityMap predict(const ScalarVolume& patch, const Index3& offset) const = 0;
};

class ConstantPredictor final : public Predictor {
 public:
  explicit ConstantPredictor(float p);
  ProbabilityMap predict(const ScalarVolume& patch, const Index3& offset) const override;

 private:
  float p_;
};

/// 1 inside the ball |index - centre| <= radius (volume voxel units), else 0.
class SpherePredictor final : public Predictor {
 public:
  SpherePredictor(const Vec3& centre, double radius);
  ProbabilityMap predict(const ScalarVolume& patch, const Index3& offset) const override;

 private:
  Vec3 centre_;
  double radius_;
};

/// Serves windows of a precomputed full-volume probability map (zero outside).
class PrecomputedPredictor final : public Predictor {
 public:
  explicit PrecomputedPredictor(ProbabilityMap full);
  ProbabilityMap predict(const ScalarVolume& patch, const Index3& offset) const override;
  const ProbabilityMap& map() const { return full_; }

 private:
  ProbabilityMap full_;
};

/// Parses `constant:<p>`, `sphere:<cx,cy,cz,r>` or `external:<dir>`. The
/// external form loads <dir>/<file name of input_path>.
std::unique_ptr<Predictor> make_predictor(std::string_view spec, const std::filesystem::path& input_path);

/// Runs the predictor on every window and averages overlapping outputs with
/// equal weight. Patch predictions may run on `jobs` threads; accumulation is
/// always in window order.
ProbabilityMap stitch(const ScalarVolume& volume, const Predictor& predictor, const TileGrid& grid, int jobs = 1);

}  // namespace flairkit
