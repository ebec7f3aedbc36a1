#include "flairkit/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>

namespace flairkit::oracle {

namespace {

void check_size(const BinaryMask& m) {
  if (m.geometry().voxel_count() > kMaxVoxels) throw Error("oracle input exceeds 32^3 voxels");
}

void check_pair(const BinaryMask& a, const BinaryMask& b) {
  check_size(a);
  check_size(b);
  if (a.dims() != b.dims()) throw GeometryMismatch("oracle: dims differ");
}

std::set<std::int64_t> voxel_set(const BinaryMask& m) {
  std::set<std::int64_t> s;
  for (std::int64_t n = 0; n < static_cast<std::int64_t>(m.size()); ++n)
    if (m[n] == 1) s.insert(n);
  return s;
}

bool is_set(const BinaryMask& m, std::int64_t i, std::int64_t j, std::int64_t k) {
  const Index3& d = m.dims();
  if (i < 0 || j < 0 || k < 0 || i >= d[0] || j >= d[1] || k >= d[2]) return false;
  return m.at(i, j, k) == 1;
}

std::vector<Index3> surface(const BinaryMask& m) {
  std::vector<Index3> out;
  const Index3& d = m.dims();
  for (std::int64_t k = 0; k < d[2]; ++k)
    for (std::int64_t j = 0; j < d[1]; ++j)
      for (std::int64_t i = 0; i < d[0]; ++i) {
        if (!is_set(m, i, j, k)) continue;
        const bool on_edge = i == 0 || j == 0 || k == 0 || i + 1 == d[0] || j + 1 == d[1] || k + 1 == d[2];
        int inside = 0;
        inside += is_set(m, i - 1, j, k);
        inside += is_set(m, i + 1, j, k);
        inside += is_set(m, i, j - 1, k);
        inside += is_set(m, i, j + 1, k);
        inside += is_set(m, i, j, k - 1);
        inside += is_set(m, i, j, k + 1);
        if (on_edge || inside < 6) out.push_back({i, j, k});
      }
  return out;
}

double nearest(const Index3& p, const std::vector<Index3>& targets, const Vec3& s) {
  double best = INFINITY;
  for (const Index3& q : targets) {
    const double dx = static_cast<double>(p[0] - q[0]) * s[0];
    const double dy = static_cast<double>(p[1] - q[1]) * s[1];
    const double dz = static_cast<double>(p[2] - q[2]) * s[2];
    best = std::min(best, dx * dx + dy * dy + dz * dz);
  }
  return std::sqrt(best);
}

}  // namespace

double dice(const BinaryMask& a, const BinaryMask& b) {
  check_pair(a, b);
  const auto sa = voxel_set(a), sb = voxel_set(b);
  std::vector<std::int64_t> common;
  std::set_intersection(sa.begin(), sa.end(), sb.begin(), sb.end(), std::back_inserter(common));
  if (sa.empty() && sb.empty()) return 1.0;
  return 2.0 * static_cast<double>(common.size()) / static_cast<double>(sa.size() + sb.size());
}

double hd95(const BinaryMask& a, const BinaryMask& b) {
  check_pair(a, b);
  const auto sa = surface(a), sb = surface(b);
  if (sa.empty() || sb.empty()) throw Error("oracle hd95 requires two nonempty masks");
  const Vec3& s = a.spacing();
  std::vector<double> d;
  for (const auto& p : sa) d.push_back(nearest(p, sb, s));
  for (const auto& p : sb) d.push_back(nearest(p, sa, s));
  std::sort(d.begin(), d.end());

  // 1-based rank x = 0.95 (N + 1), clamped to [1, N].
  const double n = static_cast<double>(d.size());
  double x = 0.95 * (n + 1.0);
  if (x < 1.0) x = 1.0;
  if (x > n) x = n;
  const double whole = std::floor(x);
  const std::size_t i = static_cast<std::size_t>(whole) - 1;
  if (i + 1 >= d.size()) return d[i];
  return d[i] + (x - whole) * (d[i + 1] - d[i]);
}

std::vector<std::uint32_t> components(const BinaryMask& mask, int connectivity) {
  check_size(mask);
  if (connectivity != 6 && connectivity != 26) throw Error("oracle connectivity must be 6 or 26");
  const Index3& d = mask.dims();
  std::vector<std::uint32_t> labels(mask.size(), 0);
  std::vector<std::array<int, 3>> steps;
  for (int dz = -1; dz <= 1; ++dz)
    for (int dy = -1; dy <= 1; ++dy)
      for (int dx = -1; dx <= 1; ++dx) {
        const int manhattan = std::abs(dx) + std::abs(dy) + std::abs(dz);
        if (manhattan == 0) continue;
        if (connectivity == 6 && manhattan != 1) continue;
        steps.push_back({dx, dy, dz});
      }

  std::uint32_t next = 0;
  for (std::int64_t k = 0; k < d[2]; ++k)
    for (std::int64_t j = 0; j < d[1]; ++j)
      for (std::int64_t i = 0; i < d[0]; ++i) {
        if (!is_set(mask, i, j, k) || labels[mask.geometry().index(i, j, k)] != 0) continue;
        ++next;
        std::vector<Index3> stack{{i, j, k}};
        labels[mask.geometry().index(i, j, k)] = next;
        while (!stack.empty()) {
          const Index3 p = stack.back();
          stack.pop_back();
          for (const auto& st : steps) {
            const std::int64_t x = p[0] + st[0], y = p[1] + st[1], z = p[2] + st[2];
            if (!is_set(mask, x, y, z)) continue;
            auto& l = labels[mask.geometry().index(x, y, z)];
            if (l != 0) continue;
            l = next;
            stack.push_back({x, y, z});
          }
        }
      }
  return labels;
}

bool same_partition(const std::vector<std::uint32_t>& a, const std::vector<std::uint32_t>& b) {
  if (a.size() != b.size()) return false;
  std::map<std::uint32_t, std::uint32_t> fwd, bwd;
  for (std::size_t n = 0; n < a.size(); ++n) {
    if ((a[n] == 0) != (b[n] == 0)) return false;
    if (a[n] == 0) continue;
    auto [f, fi] = fwd.try_emplace(a[n], b[n]);
    if (f->second != b[n]) return false;
    auto [r, ri] = bwd.try_emplace(b[n], a[n]);
    if (r->second != a[n]) return false;
  }
  return true;
}

}  // namespace flairkit::oracle
