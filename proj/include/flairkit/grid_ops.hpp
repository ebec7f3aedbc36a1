#pragma once

#include <algorithm>

#include "flairkit/volume.hpp"

namespace flairkit {

/// Axis-aligned voxel box, lo inclusive, hi exclusive.
struct CropBox {
  Index3 lo{0, 0, 0};
  Index3 hi{0, 0, 0};

  Index3 extent() const { return {hi[0] - lo[0], hi[1] - lo[1], hi[2] - lo[2]}; }
  bool operator==(const CropBox&) const = default;
};

inline CropBox full_box(const Geometry& g) { return {{0, 0, 0}, g.dims}; }

/// Geometry of the sub-lattice starting at `offset` (may be negative) with the
/// given dims. Orientation passes through.
inline Geometry sub_geometry(const Geometry& g, const Index3& offset, const Index3& dims) {
  Geometry out = g;
  out.dims = dims;
  for (int a = 0; a < 3; ++a) out.origin[a] = g.origin[a] + static_cast<double>(offset[a]) * g.spacing[a];
  return out;
}

/// Extracts the window [offset, offset + dims) from `in`; voxels outside the
/// source are filled with `fill`.
template <class G>
G extract(const G& in, const Index3& offset, const Index3& dims, typename G::value_type fill = {}) {
  G out(sub_geometry(in.geometry(), offset, dims), fill);
  const Index3& src = in.dims();
  const std::int64_t i0 = std::max<std::int64_t>(0, -offset[0]);
  const std::int64_t i1 = std::min<std::int64_t>(dims[0], src[0] - offset[0]);
  if (i1 <= i0) return out;
  for (std::int64_t k = 0; k < dims[2]; ++k) {
    const std::int64_t sk = k + offset[2];
    if (sk < 0 || sk >= src[2]) continue;
    for (std::int64_t j = 0; j < dims[1]; ++j) {
      const std::int64_t sj = j + offset[1];
      if (sj < 0 || sj >= src[1]) continue;
      const auto* s = &in.at(i0 + offset[0], sj, sk);
      std::copy(s, s + (i1 - i0), &out.at(i0, j, k));
    }
  }
  return out;
}

template <class G>
G crop(const G& in, const CropBox& box) {
  return extract(in, box.lo, box.extent());
}

/// Inverse of crop: places `in` at box.lo inside a zero grid of geometry `full`.
template <class G>
G uncrop(const G& in, const CropBox& box, const Geometry& full) {
  G out(full);
  const Index3 e = box.extent();
  if (in.dims() != e) throw GeometryMismatch("uncrop: input dims do not match the crop box");
  for (std::int64_t k = 0; k < e[2]; ++k)
    for (std::int64_t j = 0; j < e[1]; ++j) {
      const auto* s = &in.at(0, j, k);
      std::copy(s, s + e[0], &out.at(box.lo[0], box.lo[1] + j, box.lo[2] + k));
    }
  return out;
}

}  // namespace flairkit
