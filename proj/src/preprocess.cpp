#include "flairkit/preprocess.hpp"

#include <algorithm>
#include <cmath>

#include "flairkit/stats.hpp"

namespace flairkit {

namespace {

// Per-axis linear sampling positions: index pair and weight of the upper one.
struct AxisSample {
  std::int64_t i0 = 0;
  std::int64_t i1 = 0;
  double t = 0.0;
  std::int64_t nearest = 0;
};

std::vector<AxisSample> axis_samples(std::int64_t out_n, std::int64_t in_n, double ratio) {
  std::vector<AxisSample> s(static_cast<std::size_t>(out_n));
  const double max_c = static_cast<double>(in_n - 1);
  for (std::int64_t i = 0; i < out_n; ++i) {
    const double c = std::clamp(static_cast<double>(i) * ratio, 0.0, max_c);
    auto& e = s[static_cast<std::size_t>(i)];
    e.i0 = static_cast<std::int64_t>(std::floor(c));
    e.i1 = std::min(e.i0 + 1, in_n - 1);
    e.t = c - static_cast<double>(e.i0);
    e.nearest = std::min(static_cast<std::int64_t>(std::floor(c + 0.5)), in_n - 1);
  }
  return s;
}

inline double lerp(double a, double b, double t) { return t == 0.0 ? a : a + t * (b - a); }

std::optional<Orientation> rescale_orientation(const Geometry& from, const Vec3& to_spacing) {
  if (!from.orientation) return std::nullopt;
  Orientation o = *from.orientation;
  for (int r = 0; r < 3; ++r)
    for (int c = 0; c < 3; ++c) o.srow[r][c] = static_cast<float>(o.srow[r][c] * to_spacing[c] / from.spacing[c]);
  return o;
}

template <class G>
G resample_nearest(const G& in, const Geometry& target) {
  G out(target);
  const Geometry& g = in.geometry();
  std::array<std::vector<AxisSample>, 3> s;
  for (int a = 0; a < 3; ++a) s[a] = axis_samples(target.dims[a], g.dims[a], target.spacing[a] / g.spacing[a]);
  std::int64_t n = 0;
  for (const auto& z : s[2])
    for (const auto& y : s[1])
      for (const auto& x : s[0]) out[n++] = in.at(x.nearest, y.nearest, z.nearest);
  return out;
}

ScalarVolume resample_linear(const ScalarVolume& in, const Geometry& target) {
  ScalarVolume out(target);
  const Geometry& g = in.geometry();
  std::array<std::vector<AxisSample>, 3> s;
  for (int a = 0; a < 3; ++a) s[a] = axis_samples(target.dims[a], g.dims[a], target.spacing[a] / g.spacing[a]);
  std::int64_t n = 0;
  for (const auto& z : s[2])
    for (const auto& y : s[1])
      for (const auto& x : s[0]) {
        auto v = [&](std::int64_t i, std::int64_t j, std::int64_t k) { return static_cast<double>(in.at(i, j, k)); };
        const double c00 = lerp(v(x.i0, y.i0, z.i0), v(x.i1, y.i0, z.i0), x.t);
        const double c10 = lerp(v(x.i0, y.i1, z.i0), v(x.i1, y.i1, z.i0), x.t);
        const double c01 = lerp(v(x.i0, y.i0, z.i1), v(x.i1, y.i0, z.i1), x.t);
        const double c11 = lerp(v(x.i0, y.i1, z.i1), v(x.i1, y.i1, z.i1), x.t);
        out[n++] = static_cast<float>(lerp(lerp(c00, c10, y.t), lerp(c01, c11, y.t), z.t));
      }
  return out;
}

}  // namespace

Geometry resampled_geometry(const Geometry& g, const Vec3& target_spacing) {
  Geometry out = g;
  for (int a = 0; a < 3; ++a) {
    if (!(target_spacing[a] > 0.0)) throw Error("target spacing must be positive");
    const double n = std::round(static_cast<double>(g.dims[a]) * g.spacing[a] / target_spacing[a]);
    out.dims[a] = std::max<std::int64_t>(1, static_cast<std::int64_t>(n));
    out.spacing[a] = target_spacing[a];
  }
  out.orientation = rescale_orientation(g, target_spacing);
  return out;
}

ScalarVolume resample_to(const ScalarVolume& volume, const Geometry& target, Interpolation interpolation) {
  return interpolation == Interpolation::Linear ? resample_linear(volume, target)
                                                : resample_nearest(volume, target);
}

BinaryMask resample_to(const BinaryMask& mask, const Geometry& target) { return resample_nearest(mask, target); }

ScalarVolume resample_isotropic(const ScalarVolume& volume, const Vec3& target_spacing,
                                Interpolation interpolation) {
  return resample_to(volume, resampled_geometry(volume.geometry(), target_spacing), interpolation);
}

HeadCrop crop_to_head(const ScalarVolume& volume, double threshold_fraction, int margin) {
  const auto values = volume.values();
  const float max_v = *std::max_element(values.begin(), values.end());
  const double threshold = threshold_fraction * static_cast<double>(max_v);
  const Index3& d = volume.dims();

  Index3 lo{d[0], d[1], d[2]};
  Index3 hi{-1, -1, -1};
  if (max_v > 0.f) {
    std::int64_t n = 0;
    for (std::int64_t k = 0; k < d[2]; ++k)
      for (std::int64_t j = 0; j < d[1]; ++j)
        for (std::int64_t i = 0; i < d[0]; ++i, ++n) {
          if (static_cast<double>(values[static_cast<std::size_t>(n)]) > threshold) {
            lo = {std::min(lo[0], i), std::min(lo[1], j), std::min(lo[2], k)};
            hi = {std::max(hi[0], i), std::max(hi[1], j), std::max(hi[2], k)};
          }
        }
  }
  if (hi[0] < 0) return {volume, full_box(volume.geometry())};

  CropBox box;
  for (int a = 0; a < 3; ++a) {
    box.lo[a] = std::max<std::int64_t>(0, lo[a] - margin);
    box.hi[a] = std::min<std::int64_t>(d[a], hi[a] + 1 + margin);
  }
  return {crop(volume, box), box};
}

ScalarVolume clip_intensities(const ScalarVolume& volume, double low_pct, double high_pct) {
  if (!(low_pct >= 0.0 && low_pct < high_pct && high_pct <= 100.0)) {
    throw Error("clip_intensities: need 0 <= low_pct < high_pct <= 100");
  }
  std::vector<float> scratch(volume.values().begin(), volume.values().end());
  const double lo = percentile_inplace(std::span<float>(scratch), low_pct);
  const double hi = percentile_inplace(std::span<float>(scratch), high_pct);
  ScalarVolume out = volume;
  for (float& v : out.values()) {
    const double x = std::clamp(static_cast<double>(v), lo, hi);
    v = static_cast<float>(x);
  }
  return out;
}

ScalarVolume normalize_nonzero(const ScalarVolume& volume, NormalizeMode mode) {
  double sum = 0.0;
  std::int64_t n = 0;
  for (float v : volume.values()) {
    if (v != 0.f) {
      sum += v;
      ++n;
    }
  }
  if (n == 0) return volume;
  const double m = sum / static_cast<double>(n);
  double ss = 0.0;
  for (float v : volume.values()) {
    if (v != 0.f) ss += (v - m) * (v - m);
  }
  const double sd = std::sqrt(ss / static_cast<double>(n));
  const bool divide = mode == NormalizeMode::ZScore && n > 1 && sd > 0.0;

  ScalarVolume out = volume;
  for (float& v : out.values()) {
    if (v == 0.f) continue;
    const double z = divide ? (v - m) / sd : v - m;
    v = static_cast<float>(z);
  }
  return out;
}

Preprocessed preprocess_pipeline(const ScalarVolume& volume, const PreprocessConfig& config) {
  PreprocMeta meta;
  meta.original = volume.geometry();
  meta.resampled = resampled_geometry(volume.geometry(), config.target_spacing);

  ScalarVolume v = resample_to(volume, meta.resampled, Interpolation::Linear);
  HeadCrop head = crop_to_head(v, config.head_threshold_fraction, config.crop_margin);
  meta.crop = head.box;

  {
    std::vector<float> scratch(head.volume.values().begin(), head.volume.values().end());
    meta.clip_low = percentile_inplace(std::span<float>(scratch), config.clip_low_pct);
    meta.clip_high = percentile_inplace(std::span<float>(scratch), config.clip_high_pct);
  }
  v = clip_intensities(head.volume, config.clip_low_pct, config.clip_high_pct);

  double sum = 0.0, ss = 0.0;
  std::int64_t n = 0;
  for (float x : v.values())
    if (x != 0.f) {
      sum += x;
      ++n;
    }
  if (n > 0) {
    meta.nonzero_mean = sum / static_cast<double>(n);
    for (float x : v.values())
      if (x != 0.f) ss += (x - meta.nonzero_mean) * (x - meta.nonzero_mean);
    meta.nonzero_std = std::sqrt(ss / static_cast<double>(n));
  }
  v = normalize_nonzero(v, config.normalize);
  return {std::move(v), meta};
}

BinaryMask map_mask_forward(const BinaryMask& mask, const PreprocMeta& meta) {
  require_same_geometry(mask.geometry(), meta.original, "map_mask_forward");
  return crop(resample_to(mask, meta.resampled), meta.crop);
}

BinaryMask map_mask_inverse(const BinaryMask& mask, const PreprocMeta& meta) {
  if (mask.dims() != meta.crop.extent()) throw GeometryMismatch("map_mask_inverse: mask does not match crop box");
  return resample_to(uncrop(mask, meta.crop, meta.resampled), meta.original);
}

}  // namespace flairkit
