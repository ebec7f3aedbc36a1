#include "flairkit/phantom.hpp"

#include <cmath>

#include "flairkit/components.hpp"
#include "flairkit/rng.hpp"

namespace flairkit {

namespace {

template <class Fn>
void for_each_in_ellipsoid(const Ellipsoid& e, const Geometry& g, Fn&& fn) {
  for (int a = 0; a < 3; ++a)
    if (!(e.radii_mm[a] > 0.0)) return;
  for (std::int64_t k = 0; k < g.dims[2]; ++k)
    for (std::int64_t j = 0; j < g.dims[1]; ++j)
      for (std::int64_t i = 0; i < g.dims[0]; ++i) {
        const Index3 idx{i, j, k};
        double r = 0.0;
        for (int a = 0; a < 3; ++a) {
          const double p = g.origin[a] + static_cast<double>(idx[a]) * g.spacing[a];
          const double u = (p - e.center_mm[a]) / e.radii_mm[a];
          r += u * u;
        }
        if (r <= 1.0) fn(g.index(i, j, k));
      }
}

BinaryMask morph(const BinaryMask& in, bool grow) {
  BinaryMask out = in;
  const Index3& d = in.dims();
  const std::uint8_t target = grow ? 0 : 1;
  for (std::int64_t k = 0; k < d[2]; ++k)
    for (std::int64_t j = 0; j < d[1]; ++j)
      for (std::int64_t i = 0; i < d[0]; ++i) {
        if (in.at(i, j, k) != target) continue;
        bool hit = false;
        const std::int64_t nb[6][3] = {{i - 1, j, k}, {i + 1, j, k}, {i, j - 1, k},
                                       {i, j + 1, k}, {i, j, k - 1}, {i, j, k + 1}};
        for (const auto& n : nb) {
          if (!in.geometry().contains(n[0], n[1], n[2])) {
            hit = hit || !grow;  // erosion treats outside as background
            continue;
          }
          hit = hit || in.at(n[0], n[1], n[2]) != target;
        }
        if (hit) out.at(i, j, k) = grow ? 1 : 0;
      }
  return out;
}

}  // namespace

BinaryMask rasterize(const Ellipsoid& e, const Geometry& g) {
  BinaryMask out(g);
  for_each_in_ellipsoid(e, g, [&](std::int64_t n) { out[n] = 1; });
  return out;
}

Phantom make_phantom(const PhantomSpec& spec) {
  const Geometry& g = spec.geometry;
  g.validate();
  for (const auto& e : spec.ellipsoids) {
    for (int a = 0; a < 3; ++a) {
      const double lo = g.origin[a];
      const double hi = g.origin[a] + static_cast<double>(g.dims[a] - 1) * g.spacing[a];
      if (e.center_mm[a] < lo || e.center_mm[a] > hi) throw Error("ellipsoid centre outside the volume");
    }
  }
  Phantom p{ScalarVolume(g), BinaryMask(g)};
  for (const auto& e : spec.ellipsoids) {
    for_each_in_ellipsoid(e, g, [&](std::int64_t n) {
      p.volume[n] = static_cast<float>(e.intensity);
      p.mask[n] = 1;
    });
  }
  if (spec.noise_sigma > 0.0) {
    CounterRng rng(spec.seed);
    for (float& v : p.volume.values()) v = static_cast<float>(v + spec.noise_sigma * rng.normal());
  }
  return p;
}

BinaryMask dilate(const BinaryMask& mask, int iterations) {
  BinaryMask out = mask;
  for (int i = 0; i < iterations; ++i) out = morph(out, true);
  return out;
}

BinaryMask erode(const BinaryMask& mask, int iterations) {
  BinaryMask out = mask;
  for (int i = 0; i < iterations; ++i) out = morph(out, false);
  return out;
}

BinaryMask shift(const BinaryMask& mask, const Index3& by) {
  BinaryMask out(mask.geometry());
  const Index3& d = mask.dims();
  for (std::int64_t k = 0; k < d[2]; ++k)
    for (std::int64_t j = 0; j < d[1]; ++j)
      for (std::int64_t i = 0; i < d[0]; ++i) {
        if (!mask.at(i, j, k)) continue;
        const std::int64_t x = i + by[0], y = j + by[1], z = k + by[2];
        if (mask.geometry().contains(x, y, z)) out.at(x, y, z) = 1;
      }
  return out;
}

ProbabilityMap perturb_prediction(const BinaryMask& gt, const Perturbation& p, std::uint64_t seed) {
  using Kind = Perturbation::Kind;
  switch (p.kind) {
    case Kind::Identity: return to_probability(gt);
    case Kind::Dilate: return to_probability(dilate(gt, p.amount));
    case Kind::Erode: return to_probability(erode(gt, p.amount));
    case Kind::Shift: return to_probability(shift(gt, p.shift));
    case Kind::DropComponent: {
      const LabeledComponents cc = connected_components(gt, Connectivity::TwentySix);
      std::vector<bool> keep(cc.count() + 1, true);
      if (p.amount >= 0 && static_cast<std::size_t>(p.amount) < cc.count()) keep[static_cast<std::size_t>(p.amount) + 1] = false;
      return to_probability(select_labels(cc, keep));
    }
    case Kind::AddBlob: {
      Ellipsoid blob = p.blob;
      if (blob.radii_mm[0] <= 0.0) {
        CounterRng rng(seed);
        const Geometry& g = gt.geometry();
        for (int a = 0; a < 3; ++a) {
          const double extent = static_cast<double>(g.dims[a] - 1) * g.spacing[a];
          blob.center_mm[a] = g.origin[a] + rng.uniform(0.0, extent);
          blob.radii_mm[a] = 3.0;
        }
      }
      BinaryMask out = gt;
      const BinaryMask extra = rasterize(blob, gt.geometry());
      for (std::size_t n = 0; n < out.size(); ++n)
        if (extra[static_cast<std::int64_t>(n)]) out[static_cast<std::int64_t>(n)] = 1;
      return to_probability(out);
    }
  }
  throw Error("unknown perturbation");
}

void to_json(nlohmann::json& j, const PhantomSpec& spec) {
  auto ellipsoids = nlohmann::json::array();
  for (const auto& e : spec.ellipsoids) {
    ellipsoids.push_back({{"center", e.center_mm}, {"radii", e.radii_mm}, {"intensity", e.intensity}});
  }
  j = {{"dims", spec.geometry.dims},
       {"spacing", spec.geometry.spacing},
       {"origin", spec.geometry.origin},
       {"noise_sigma", spec.noise_sigma},
       {"seed", spec.seed},
       {"ellipsoids", ellipsoids}};
}

void from_json(const nlohmann::json& j, PhantomSpec& spec) {
  spec.geometry.dims = j.at("dims").get<Index3>();
  spec.geometry.spacing = j.value("spacing", Vec3{1, 1, 1});
  spec.geometry.origin = j.value("origin", Vec3{0, 0, 0});
  spec.noise_sigma = j.value("noise_sigma", 0.0);
  spec.seed = j.value("seed", std::uint64_t{0});
  spec.ellipsoids.clear();
  for (const auto& e : j.value("ellipsoids", nlohmann::json::array())) {
    Ellipsoid el;
    el.center_mm = e.at("center").get<Vec3>();
    if (e.contains("radius")) {
      const double r = e.at("radius").get<double>();
      el.radii_mm = {r, r, r};
    } else {
      el.radii_mm = e.at("radii").get<Vec3>();
    }
    el.intensity = e.value("intensity", 1.0);
    spec.ellipsoids.push_back(el);
  }
}

}  // namespace flairkit
