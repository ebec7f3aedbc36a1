#include "flairkit/stats.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "flairkit/volume.hpp"

namespace flairkit {

namespace {

template <class T>
double percentile_impl(std::span<T> v, double p) {
  if (v.empty()) throw Error("percentile of an empty set");
  if (!(p >= 0.0 && p <= 100.0)) throw Error("percentile must lie in [0, 100]");
  const auto n = static_cast<double>(v.size());
  const double rank = std::clamp(p / 100.0 * (n + 1.0), 1.0, n);  // 1-based
  const auto lo = static_cast<std::size_t>(std::floor(rank)) - 1;
  const double frac = rank - std::floor(rank);

  auto lo_it = v.begin() + static_cast<std::ptrdiff_t>(lo);
  std::nth_element(v.begin(), lo_it, v.end());
  const double a = static_cast<double>(*lo_it);
  if (frac == 0.0 || lo + 1 >= v.size()) return a;
  const double b = static_cast<double>(*std::min_element(lo_it + 1, v.end()));
  return a + frac * (b - a);
}

}  // namespace

double percentile_inplace(std::span<double> values, double p) { return percentile_impl(values, p); }
double percentile_inplace(std::span<float> values, double p) { return percentile_impl(values, p); }

double percentile(std::span<const double> values, double p) {
  std::vector<double> copy(values.begin(), values.end());
  return percentile_inplace(std::span<double>(copy), p);
}

double mean(std::span<const double> values) {
  if (values.empty()) return 0.0;
  double sum = 0.0;
  for (double v : values) sum += v;
  return sum / static_cast<double>(values.size());
}

double sample_std(std::span<const double> values) {
  if (values.size() < 2) return 0.0;
  const double m = mean(values);
  double ss = 0.0;
  for (double v : values) ss += (v - m) * (v - m);
  return std::sqrt(ss / static_cast<double>(values.size() - 1));
}

std::optional<MedianIqr> median_iqr(std::span<const double> values) {
  if (values.empty()) return std::nullopt;
  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());
  MedianIqr m;
  m.count = sorted.size();
  m.median = percentile_inplace(std::span<double>(sorted), 50.0);
  m.q1 = percentile_inplace(std::span<double>(sorted), 25.0);
  m.q3 = percentile_inplace(std::span<double>(sorted), 75.0);
  return m;
}

std::string format_median_iqr(const MedianIqr& m) {
  char buf[96];
  std::snprintf(buf, sizeof(buf), "%.2f [%.2f-%.2f]", m.median, m.q1, m.q3);
  return buf;
}

}  // namespace flairkit
