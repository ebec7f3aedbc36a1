#include "flairkit/distance.hpp"

#include <cmath>
#include <limits>

namespace flairkit {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// In-place 1D transform of f (length n, stride-free scratch) with sample spacing w.
void edt_1d(std::vector<double>& f, double w, std::vector<std::int64_t>& v, std::vector<double>& z,
            std::vector<double>& out) {
  const auto n = static_cast<std::int64_t>(f.size());
  const double w2 = w * w;
  std::int64_t k = -1;
  for (std::int64_t q = 0; q < n; ++q) {
    if (f[q] == kInf) continue;
    const double fq = f[q] + (q * w) * (q * w);
    double s = -kInf;
    while (k >= 0) {
      const std::int64_t p = v[k];
      s = (fq - (f[p] + (p * w) * (p * w))) / (2.0 * w2 * static_cast<double>(q - p));
      if (s > z[k]) break;
      --k;
    }
    ++k;
    v[k] = q;
    z[k] = k == 0 ? -kInf : s;
  }
  if (k < 0) {
    std::fill(out.begin(), out.end(), kInf);
    f.swap(out);
    return;
  }
  std::int64_t j = 0;
  for (std::int64_t q = 0; q < n; ++q) {
    while (j < k && z[j + 1] < static_cast<double>(q)) ++j;
    const double d = static_cast<double>(q - v[j]) * w;
    out[q] = d * d + f[v[j]];
  }
  f.swap(out);
}

}  // namespace

std::vector<double> squared_edt(std::span<const std::uint8_t> feature, const Index3& dims, const Vec3& spacing) {
  const std::int64_t nx = dims[0], ny = dims[1], nz = dims[2];
  std::vector<double> dist(feature.size());
  for (std::size_t n = 0; n < feature.size(); ++n) dist[n] = feature[n] ? 0.0 : kInf;

  const std::int64_t longest = std::max({nx, ny, nz});
  std::vector<double> line(static_cast<std::size_t>(longest)), out(static_cast<std::size_t>(longest));
  std::vector<std::int64_t> v(static_cast<std::size_t>(longest));
  std::vector<double> z(static_cast<std::size_t>(longest));

  auto pass = [&](std::int64_t n, std::int64_t stride, std::int64_t base, double w) {
    line.resize(static_cast<std::size_t>(n));
    out.resize(static_cast<std::size_t>(n));
    bool any = false;
    for (std::int64_t q = 0; q < n; ++q) {
      line[q] = dist[static_cast<std::size_t>(base + q * stride)];
      any = any || line[q] != kInf;
    }
    if (!any) return;
    edt_1d(line, w, v, z, out);
    for (std::int64_t q = 0; q < n; ++q) dist[static_cast<std::size_t>(base + q * stride)] = line[q];
  };

  for (std::int64_t k = 0; k < nz; ++k)
    for (std::int64_t j = 0; j < ny; ++j) pass(nx, 1, nx * (j + ny * k), spacing[0]);
  for (std::int64_t k = 0; k < nz; ++k)
    for (std::int64_t i = 0; i < nx; ++i) pass(ny, nx, i + nx * ny * k, spacing[1]);
  for (std::int64_t j = 0; j < ny; ++j)
    for (std::int64_t i = 0; i < nx; ++i) pass(nz, nx * ny, i + nx * j, spacing[2]);
  return dist;
}

BinaryMask boundary(const BinaryMask& mask) {
  const Geometry& g = mask.geometry();
  const Index3& d = g.dims;
  BinaryMask out(g);
  for (std::int64_t k = 0; k < d[2]; ++k)
    for (std::int64_t j = 0; j < d[1]; ++j)
      for (std::int64_t i = 0; i < d[0]; ++i) {
        if (!mask.at(i, j, k)) continue;
        const bool edge = i == 0 || j == 0 || k == 0 || i == d[0] - 1 || j == d[1] - 1 || k == d[2] - 1;
        out.at(i, j, k) = edge || !mask.at(i - 1, j, k) || !mask.at(i + 1, j, k) || !mask.at(i, j - 1, k) ||
                          !mask.at(i, j + 1, k) || !mask.at(i, j, k - 1) || !mask.at(i, j, k + 1);
      }
  return out;
}

}  // namespace flairkit
