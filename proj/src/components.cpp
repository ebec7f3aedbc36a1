#include "flairkit/components.hpp"

#include <algorithm>
#include <numeric>

namespace flairkit {

namespace {

class DisjointSets {
 public:
  std::uint32_t make() {
    parent_.push_back(static_cast<std::uint32_t>(parent_.size()));
    return parent_.back();
  }

  std::uint32_t find(std::uint32_t x) {
    std::uint32_t root = x;
    while (parent_[root] != root) root = parent_[root];
    while (parent_[x] != root) {
      const std::uint32_t next = parent_[x];
      parent_[x] = root;
      x = next;
    }
    return root;
  }

  std::uint32_t unite(std::uint32_t a, std::uint32_t b) {
    a = find(a);
    b = find(b);
    if (a == b) return a;
    if (b < a) std::swap(a, b);
    parent_[b] = a;
    return a;
  }

  std::size_t size() const { return parent_.size(); }

 private:
  std::vector<std::uint32_t> parent_;
};

struct Offset {
  int di, dj, dk;
};

// Neighbours already visited in x-fastest raster order.
std::vector<Offset> backward_neighbours(Connectivity c) {
  if (c == Connectivity::Six) return {{-1, 0, 0}, {0, -1, 0}, {0, 0, -1}};
  std::vector<Offset> out;
  for (int dk = -1; dk <= 0; ++dk)
    for (int dj = -1; dj <= 1; ++dj)
      for (int di = -1; di <= 1; ++di) {
        if (dk == 0 && (dj > 0 || (dj == 0 && di >= 0))) continue;
        out.push_back({di, dj, dk});
      }
  return out;
}

}  // namespace

LabeledComponents connected_components(const BinaryMask& mask, Connectivity connectivity) {
  const Geometry& g = mask.geometry();
  const Index3& d = g.dims;
  LabeledComponents out;
  out.geometry = g;
  out.labels.assign(mask.size(), 0);

  const auto offsets = backward_neighbours(connectivity);
  DisjointSets sets;
  sets.make();  // slot 0 = background

  std::int64_t n = 0;
  for (std::int64_t k = 0; k < d[2]; ++k)
    for (std::int64_t j = 0; j < d[1]; ++j)
      for (std::int64_t i = 0; i < d[0]; ++i, ++n) {
        if (!mask[n]) continue;
        std::uint32_t label = 0;
        for (const Offset& o : offsets) {
          const std::int64_t ni = i + o.di, nj = j + o.dj, nk = k + o.dk;
          if (ni < 0 || nj < 0 || nk < 0 || ni >= d[0] || nj >= d[1]) continue;
          const std::uint32_t nl = out.labels[static_cast<std::size_t>(g.index(ni, nj, nk))];
          if (nl == 0) continue;
          label = label == 0 ? nl : sets.unite(label, nl);
        }
        out.labels[static_cast<std::size_t>(n)] = label == 0 ? sets.make() : label;
      }

  // Resolve to consecutive labels in order of first appearance.
  std::vector<std::uint32_t> remap(sets.size(), 0);
  std::uint32_t next = 0;
  for (auto& l : out.labels) {
    if (l == 0) continue;
    const std::uint32_t root = sets.find(l);
    if (remap[root] == 0) {
      remap[root] = ++next;
      out.sizes.push_back(0);
    }
    l = remap[root];
    ++out.sizes[l - 1];
  }
  return out;
}

BinaryMask to_mask(const LabeledComponents& components) {
  BinaryMask out(components.geometry);
  std::transform(components.labels.begin(), components.labels.end(), out.values().begin(),
                 [](std::uint32_t l) -> std::uint8_t { return l != 0; });
  return out;
}

BinaryMask select_labels(const LabeledComponents& components, const std::vector<bool>& keep) {
  BinaryMask out(components.geometry);
  std::transform(components.labels.begin(), components.labels.end(), out.values().begin(),
                 [&](std::uint32_t l) -> std::uint8_t { return l != 0 && l < keep.size() && keep[l]; });
  return out;
}

LabeledComponents filter_components(const LabeledComponents& components, const ComponentFilter& filter) {
  if (filter.slice_axis < 0 || filter.slice_axis > 2) throw Error("slice_axis must be 0, 1 or 2");
  const Geometry& g = components.geometry;
  const std::size_t n_labels = components.count();
  std::vector<std::int64_t> lo(n_labels + 1, g.dims[filter.slice_axis]);
  std::vector<std::int64_t> hi(n_labels + 1, -1);

  const std::int64_t stride = filter.slice_axis == 0 ? 1 : (filter.slice_axis == 1 ? g.dims[0] : g.dims[0] * g.dims[1]);
  const std::int64_t extent = g.dims[filter.slice_axis];
  for (std::size_t n = 0; n < components.labels.size(); ++n) {
    const std::uint32_t l = components.labels[n];
    if (l == 0) continue;
    const std::int64_t s = (static_cast<std::int64_t>(n) / stride) % extent;
    lo[l] = std::min(lo[l], s);
    hi[l] = std::max(hi[l], s);
  }

  const double voxel_ml = voxel_volume_ml(g.spacing);
  std::vector<std::uint32_t> remap(n_labels + 1, 0);
  LabeledComponents out;
  out.geometry = g;
  for (std::size_t l = 1; l <= n_labels; ++l) {
    const double ml = static_cast<double>(components.sizes[l - 1]) * voxel_ml;
    const bool too_small = ml < filter.min_ml - 1e-12;
    const bool too_thin = hi[l] - lo[l] + 1 < filter.min_consecutive_slices;
    if (too_small || too_thin) continue;
    out.sizes.push_back(components.sizes[l - 1]);
    remap[l] = static_cast<std::uint32_t>(out.sizes.size());
  }
  out.labels.resize(components.labels.size());
  std::transform(components.labels.begin(), components.labels.end(), out.labels.begin(),
                 [&](std::uint32_t l) { return remap[l]; });
  return out;
}

BinaryMask filter_small_components(const BinaryMask& mask, const ComponentFilter& filter) {
  return to_mask(filter_components(connected_components(mask, filter.connectivity), filter));
}

}  // namespace flairkit
