#include "flairkit/augment.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "flairkit/grid_ops.hpp"

namespace flairkit {

namespace {

using Mat3 = std::array<std::array<double, 3>, 3>;

Mat3 identity() { return {{{1, 0, 0}, {0, 1, 0}, {0, 0, 1}}}; }

Mat3 rotation(int axis, double radians) {
  const double c = std::cos(radians), s = std::sin(radians);
  const int u = (axis + 1) % 3, v = (axis + 2) % 3;
  Mat3 m = identity();
  m[u][u] = c;
  m[u][v] = -s;
  m[v][u] = s;
  m[v][v] = c;
  return m;
}

// Output voxel q samples the input at centre + inv_linear * (q - centre - shift).
struct Affine {
  Mat3 inv_linear = identity();
  Vec3 shift{0, 0, 0};
};

template <class Sampler>
void warp(const Geometry& g, const Affine& t, Sampler&& sample) {
  Vec3 c;
  for (int a = 0; a < 3; ++a) c[a] = 0.5 * static_cast<double>(g.dims[a] - 1);
  std::int64_t n = 0;
  for (std::int64_t k = 0; k < g.dims[2]; ++k)
    for (std::int64_t j = 0; j < g.dims[1]; ++j)
      for (std::int64_t i = 0; i < g.dims[0]; ++i, ++n) {
        const Vec3 d{static_cast<double>(i) - c[0] - t.shift[0], static_cast<double>(j) - c[1] - t.shift[1],
                     static_cast<double>(k) - c[2] - t.shift[2]};
        Vec3 p;
        for (int r = 0; r < 3; ++r)
          p[r] = c[r] + t.inv_linear[r][0] * d[0] + t.inv_linear[r][1] * d[1] + t.inv_linear[r][2] * d[2];
        sample(n, p);
      }
}

ScalarVolume warp_linear(const ScalarVolume& in, const Affine& t) {
  ScalarVolume out(in.geometry());
  const Geometry& g = in.geometry();
  warp(g, t, [&](std::int64_t n, const Vec3& p) {
    const std::int64_t x0 = static_cast<std::int64_t>(std::floor(p[0]));
    const std::int64_t y0 = static_cast<std::int64_t>(std::floor(p[1]));
    const std::int64_t z0 = static_cast<std::int64_t>(std::floor(p[2]));
    const double fx = p[0] - x0, fy = p[1] - y0, fz = p[2] - z0;
    double acc = 0.0;
    for (int dz = 0; dz < 2; ++dz)
      for (int dy = 0; dy < 2; ++dy)
        for (int dx = 0; dx < 2; ++dx) {
          if (!g.contains(x0 + dx, y0 + dy, z0 + dz)) continue;
          const double w = (dx ? fx : 1 - fx) * (dy ? fy : 1 - fy) * (dz ? fz : 1 - fz);
          if (w != 0.0) acc += w * in.at(x0 + dx, y0 + dy, z0 + dz);
        }
    out[n] = static_cast<float>(acc);
  });
  return out;
}

BinaryMask warp_nearest(const BinaryMask& in, const Affine& t) {
  BinaryMask out(in.geometry());
  const Geometry& g = in.geometry();
  warp(g, t, [&](std::int64_t n, const Vec3& p) {
    const auto i = static_cast<std::int64_t>(std::floor(p[0] + 0.5));
    const auto j = static_cast<std::int64_t>(std::floor(p[1] + 0.5));
    const auto k = static_cast<std::int64_t>(std::floor(p[2] + 0.5));
    out[n] = g.contains(i, j, k) ? in.at(i, j, k) : 0;
  });
  return out;
}

template <class G>
G flip_impl(const G& in, int axis) {
  if (axis < 0 || axis > 2) throw Error("flip axis must be 0, 1 or 2");
  G out(in.geometry());
  const Index3& d = in.dims();
  for (std::int64_t k = 0; k < d[2]; ++k)
    for (std::int64_t j = 0; j < d[1]; ++j)
      for (std::int64_t i = 0; i < d[0]; ++i) {
        Index3 s{i, j, k};
        s[axis] = d[axis] - 1 - s[axis];
        out.at(i, j, k) = in.at(s[0], s[1], s[2]);
      }
  return out;
}

template <class Fn>
ScalarVolume for_each_patch(const ScalarVolume& volume, const std::vector<Index3>& starts, const Index3& size,
                            Fn&& fn) {
  ScalarVolume out = volume;
  const Geometry& g = volume.geometry();
  for (const Index3& s : starts) {
    Index3 lo, hi;
    for (int a = 0; a < 3; ++a) {
      lo[a] = std::clamp<std::int64_t>(s[a], 0, g.dims[a]);
      hi[a] = std::clamp<std::int64_t>(s[a] + size[a], 0, g.dims[a]);
    }
    fn(out, lo, hi);
  }
  return out;
}

}  // namespace

void AugmentConfig::validate() const {
  auto prob_ok = [](double p) { return p >= 0.0 && p <= 1.0; };
  if (!prob_ok(per_transform_probability)) throw Error("per_transform_probability must lie in [0,1]");
  if (!(rotation_range_deg[0] <= rotation_range_deg[1])) throw Error("rotation range is empty");
  if (!(gamma_range[0] <= gamma_range[1]) || !(gamma_range[0] > 0.0)) throw Error("gamma range invalid");
  if (zoom_max < 0.0 || zoom_max >= 1.0) throw Error("zoom_max must lie in [0,1)");
  if (translate_max < 0.0 || intensity_scale_shift_max < 0.0 || noise_std_max < 0.0) {
    throw Error("augmentation magnitudes must be non-negative");
  }
  for (int a = 0; a < 3; ++a) {
    if (crop_size[a] <= 0 || patch_size[a] <= 0) throw Error("crop and patch sizes must be positive");
  }
  if (patch_max_count < 1) throw Error("patch_max_count must be at least 1");
}

Sample random_crop(const ScalarVolume& volume, const BinaryMask& mask, const Index3& size, CounterRng& rng) {
  require_same_geometry(volume.geometry(), mask.geometry(), "random_crop");
  Index3 offset;
  for (int a = 0; a < 3; ++a) {
    const std::int64_t d = volume.dims()[a];
    if (d >= size[a]) {
      offset[a] = rng.uniform_int(0, d - size[a]);
    } else {
      rng.uniform_int(0, 0);  // keep the draw count fixed
      offset[a] = -((size[a] - d) / 2);
    }
  }
  return {extract(volume, offset, size), extract(mask, offset, size)};
}

ScalarVolume flip(const ScalarVolume& volume, int axis) { return flip_impl(volume, axis); }
BinaryMask flip(const BinaryMask& mask, int axis) { return flip_impl(mask, axis); }

Sample apply_geometric(const Sample& sample, const AugmentConfig& config, CounterRng& rng) {
  require_same_geometry(sample.volume.geometry(), sample.mask.geometry(), "apply_geometric");
  const double p = config.per_transform_probability;
  Sample out = sample;

  Mat3 inv = identity();
  Vec3 shift{0, 0, 0};
  bool warped = false;

  if (rng.bernoulli(p)) {
    std::vector<int> axes;
    for (int a = 0; a < 3; ++a)
      if (config.rotation_axes[a]) axes.push_back(a);
    if (!axes.empty()) {
      const int axis = axes[static_cast<std::size_t>(rng.uniform_int(0, static_cast<std::int64_t>(axes.size()) - 1))];
      const double deg = rng.uniform(config.rotation_range_deg[0], config.rotation_range_deg[1]);
      // inverse rotation = rotation by -angle
      inv = rotation(axis, -deg * std::numbers::pi / 180.0);
      warped = true;
    }
  }

  for (int a = 0; a < 3; ++a) {
    if (!config.flip_axes[a]) continue;
    if (rng.bernoulli(p)) {
      out.volume = flip(out.volume, a);
      out.mask = flip(out.mask, a);
    }
  }

  if (rng.bernoulli(p)) {
    const double zoom = rng.uniform(1.0 - config.zoom_max, 1.0 + config.zoom_max);
    for (auto& row : inv)
      for (double& x : row) x /= zoom;
    warped = true;
  }

  if (rng.bernoulli(p)) {
    for (int a = 0; a < 3; ++a) {
      shift[a] = rng.uniform(-config.translate_max, config.translate_max) * static_cast<double>(out.volume.dims()[a]);
    }
    warped = true;
  }

  if (warped) {
    const Affine t{inv, shift};
    out.volume = warp_linear(out.volume, t);
    out.mask = warp_nearest(out.mask, t);
  }
  return out;
}

ScalarVolume patch_dropout(const ScalarVolume& volume, const std::vector<Index3>& starts, const Index3& patch_size) {
  return for_each_patch(volume, starts, patch_size, [](ScalarVolume& v, const Index3& lo, const Index3& hi) {
    for (std::int64_t k = lo[2]; k < hi[2]; ++k)
      for (std::int64_t j = lo[1]; j < hi[1]; ++j)
        for (std::int64_t i = lo[0]; i < hi[0]; ++i) v.at(i, j, k) = 0.f;
  });
}

ScalarVolume patch_inversion(const ScalarVolume& volume, const std::vector<Index3>& starts,
                             const Index3& patch_size) {
  return for_each_patch(volume, starts, patch_size, [](ScalarVolume& v, const Index3& lo, const Index3& hi) {
    double sum = 0.0;
    std::int64_t n = 0;
    for (std::int64_t k = lo[2]; k < hi[2]; ++k)
      for (std::int64_t j = lo[1]; j < hi[1]; ++j)
        for (std::int64_t i = lo[0]; i < hi[0]; ++i, ++n) sum += v.at(i, j, k);
    if (n == 0) return;
    const double m = sum / static_cast<double>(n);
    for (std::int64_t k = lo[2]; k < hi[2]; ++k)
      for (std::int64_t j = lo[1]; j < hi[1]; ++j)
        for (std::int64_t i = lo[0]; i < hi[0]; ++i) v.at(i, j, k) = static_cast<float>(2.0 * m - v.at(i, j, k));
  });
}

ScalarVolume apply_gamma(const ScalarVolume& volume, double gamma) {
  const auto [mn_it, mx_it] = std::minmax_element(volume.values().begin(), volume.values().end());
  const double mn = *mn_it, mx = *mx_it;
  if (!(mx > mn) || gamma == 1.0) return volume;
  ScalarVolume out = volume;
  const double range = mx - mn;
  for (float& v : out.values()) {
    const double u = (v - mn) / range;
    v = static_cast<float>(mn + std::pow(u, gamma) * range);
  }
  return out;
}

ScalarVolume apply_intensity(const ScalarVolume& volume, const AugmentConfig& config, CounterRng& rng) {
  const double p = config.per_transform_probability;
  ScalarVolume out = volume;

  if (rng.bernoulli(p)) {
    const double factor = 1.0 + rng.uniform(-config.intensity_scale_shift_max, config.intensity_scale_shift_max);
    for (float& v : out.values()) v = static_cast<float>(v * factor);
  }

  if (rng.bernoulli(p)) {
    const auto [mn, mx] = std::minmax_element(out.values().begin(), out.values().end());
    const double offset =
        rng.uniform(-config.intensity_scale_shift_max, config.intensity_scale_shift_max) * (*mx - *mn);
    for (float& v : out.values()) v = static_cast<float>(v + offset);
  }

  if (rng.bernoulli(p)) {
    const double sigma = rng.uniform(0.0, config.noise_std_max);
    for (float& v : out.values()) v = static_cast<float>(v + sigma * rng.normal());
  }

  if (rng.bernoulli(p)) {
    out = apply_gamma(out, rng.uniform(config.gamma_range[0], config.gamma_range[1]));
  }

  if (rng.bernoulli(p)) {
    const bool invert = rng.uniform_int(0, 1) == 1;
    const std::int64_t count = rng.uniform_int(1, config.patch_max_count);
    std::vector<Index3> starts(static_cast<std::size_t>(count));
    for (auto& s : starts)
      for (int a = 0; a < 3; ++a)
        s[a] = rng.uniform_int(0, std::max<std::int64_t>(0, out.dims()[a] - config.patch_size[a]));
    out = invert ? patch_inversion(out, starts, config.patch_size) : patch_dropout(out, starts, config.patch_size);
  }
  return out;
}

Sample augment(const ScalarVolume& volume, const BinaryMask& mask, const AugmentConfig& config) {
  config.validate();
  CounterRng rng(config.seed);
  Sample s = random_crop(volume, mask, config.crop_size, rng);
  s = apply_geometric(s, config, rng);
  s.volume = apply_intensity(s.volume, config, rng);
  return s;
}

}  // namespace flairkit
