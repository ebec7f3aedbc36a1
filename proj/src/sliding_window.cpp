#include "flairkit/sliding_window.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <sstream>
#include <string>

#include "flairkit/grid_ops.hpp"
#include "flairkit/nifti.hpp"

namespace flairkit {

TileGrid plan_tiles(const Index3& dims, const Index3& patch_size, double overlap) {
  if (!(overlap >= 0.0 && overlap < 1.0)) throw Error("overlap must lie in [0, 1)");
  TileGrid grid;
  grid.volume_dims = dims;
  grid.patch_size = patch_size;
  std::array<std::vector<std::int64_t>, 3> starts;
  for (int a = 0; a < 3; ++a) {
    if (patch_size[a] <= 0 || dims[a] <= 0) throw Error("dims and patch size must be positive");
    grid.stride[a] = std::max<std::int64_t>(
        1, static_cast<std::int64_t>(std::ceil(static_cast<double>(patch_size[a]) * (1.0 - overlap) - 1e-9)));
    grid.padded_dims[a] = std::max(dims[a], patch_size[a]);
    grid.pad_before[a] = (grid.padded_dims[a] - dims[a]) / 2;
    const std::int64_t span = grid.padded_dims[a] - patch_size[a];
    const std::int64_t count = 1 + (span + grid.stride[a] - 1) / grid.stride[a];
    for (std::int64_t w = 0; w < count; ++w) starts[a].push_back(std::min(w * grid.stride[a], span));
  }
  for (auto z : starts[2])
    for (auto y : starts[1])
      for (auto x : starts[0]) grid.windows.push_back({x, y, z});
  return grid;
}

ConstantPredictor::ConstantPredictor(float p) : p_(p) {
  if (!(p >= 0.f && p <= 1.f)) throw Error("constant predictor value must lie in [0,1]");
}

ProbabilityMap ConstantPredictor::predict(const ScalarVolume& patch, const Index3&) const {
  return ProbabilityMap(patch.geometry(), p_);
}

SpherePredictor::SpherePredictor(const Vec3& centre, double radius) : centre_(centre), radius_(radius) {}

ProbabilityMap SpherePredictor::predict(const ScalarVolume& patch, const Index3& offset) const {
  ProbabilityMap out(patch.geometry());
  const Index3& d = patch.dims();
  const double r2 = radius_ * radius_;
  for (std::int64_t k = 0; k < d[2]; ++k)
    for (std::int64_t j = 0; j < d[1]; ++j)
      for (std::int64_t i = 0; i < d[0]; ++i) {
        const double x = static_cast<double>(i + offset[0]) - centre_[0];
        const double y = static_cast<double>(j + offset[1]) - centre_[1];
        const double z = static_cast<double>(k + offset[2]) - centre_[2];
        out.at(i, j, k) = (x * x + y * y + z * z <= r2) ? 1.f : 0.f;
      }
  return out;
}

PrecomputedPredictor::PrecomputedPredictor(ProbabilityMap full) : full_(std::move(full)) { validate(full_); }

ProbabilityMap PrecomputedPredictor::predict(const ScalarVolume& patch, const Index3& offset) const {
  ProbabilityMap window = extract(full_, offset, patch.dims());
  return ProbabilityMap(patch.geometry(), std::vector<float>(window.values().begin(), window.values().end()));
}

std::unique_ptr<Predictor> make_predictor(std::string_view spec, const std::filesystem::path& input_path) {
  const auto colon = spec.find(':');
  const std::string kind(spec.substr(0, colon));
  const std::string arg = colon == std::string_view::npos ? std::string() : std::string(spec.substr(colon + 1));
  if (kind == "constant") {
    return std::make_unique<ConstantPredictor>(std::stof(arg));
  }
  if (kind == "sphere") {
    std::vector<double> v;
    std::stringstream ss(arg);
    for (std::string tok; std::getline(ss, tok, ',');) v.push_back(std::stod(tok));
    if (v.size() != 4) throw Error("sphere predictor expects sphere:<cx,cy,cz,r>");
    return std::make_unique<SpherePredictor>(Vec3{v[0], v[1], v[2]}, v[3]);
  }
  if (kind == "external") {
    const std::filesystem::path file = std::filesystem::path(arg) / input_path.filename();
    return std::make_unique<PrecomputedPredictor>(load_probability(file));
  }
  throw Error("unknown predictor '" + std::string(spec) + "' (expected constant:, sphere: or external:)");
}

ProbabilityMap stitch(const ScalarVolume& volume, const Predictor& predictor, const TileGrid& grid, int jobs) {
  if (volume.dims() != grid.volume_dims) throw GeometryMismatch("stitch: tile grid planned for other dims");
  const Index3& pd = grid.padded_dims;
  const std::size_t n_padded = static_cast<std::size_t>(pd[0] * pd[1] * pd[2]);
  std::vector<double> sum(n_padded, 0.0);
  std::vector<std::uint16_t> count(n_padded, 0);

  auto run = [&](const Index3& start) {
    Index3 offset;
    for (int a = 0; a < 3; ++a) offset[a] = start[a] - grid.pad_before[a];
    ScalarVolume patch = extract(volume, offset, grid.patch_size);
    ProbabilityMap pred = predictor.predict(patch, offset);
    if (pred.dims() != grid.patch_size) throw Error("predictor returned a patch of the wrong shape");
    validate(pred);
    return pred;
  };

  auto accumulate = [&](const Index3& start, const ProbabilityMap& pred) {
    const Index3& ps = grid.patch_size;
    for (std::int64_t k = 0; k < ps[2]; ++k)
      for (std::int64_t j = 0; j < ps[1]; ++j) {
        std::size_t dst = static_cast<std::size_t>(start[0] + pd[0] * ((start[1] + j) + pd[1] * (start[2] + k)));
        const float* src = &pred.at(0, j, k);
        for (std::int64_t i = 0; i < ps[0]; ++i, ++dst) {
          sum[dst] += src[i];
          ++count[dst];
        }
      }
  };

  const std::size_t batch = static_cast<std::size_t>(std::max(1, jobs));
  for (std::size_t w = 0; w < grid.windows.size(); w += batch) {
    const std::size_t end = std::min(grid.windows.size(), w + batch);
    if (batch == 1) {
      accumulate(grid.windows[w], run(grid.windows[w]));
      continue;
    }
    std::vector<std::future<ProbabilityMap>> futures;
    for (std::size_t i = w; i < end; ++i) {
      futures.push_back(std::async(std::launch::async, run, grid.windows[i]));
    }
    for (std::size_t i = w; i < end; ++i) accumulate(grid.windows[i], futures[i - w].get());
  }

  ProbabilityMap out(volume.geometry());
  const Index3& d = volume.dims();
  const Index3& pb = grid.pad_before;
  for (std::int64_t k = 0; k < d[2]; ++k)
    for (std::int64_t j = 0; j < d[1]; ++j)
      for (std::int64_t i = 0; i < d[0]; ++i) {
        const std::size_t src = static_cast<std::size_t>((i + pb[0]) + pd[0] * ((j + pb[1]) + pd[1] * (k + pb[2])));
        if (count[src] == 0) throw Error("stitch: voxel not covered by any window");
        out.at(i, j, k) = static_cast<float>(sum[src] / count[src]);
      }
  return out;
}

}  // namespace flairkit
