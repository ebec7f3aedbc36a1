#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace flairkit {

/// Percentile by linear interpolation between closest ranks, using the
/// (N+1)-based rank: x = p/100 * (N+1), clamped to [1, N]. For
/// {1.34, 3.30, 6.89} this gives Q1 = 1.34, median = 3.30, Q3 = 6.89.
///
/// The input is reordered (partial selection). p is in [0, 100].
double percentile_inplace(std::span<double> values, double p);
double percentile_inplace(std::span<float> values, double p);

/// Copying convenience wrapper. Throws Error on empty input.
double percentile(std::span<const double> values, double p);

double mean(std::span<const double> values);

/// Sample (n-1) standard deviation; 0 for fewer than two values.
double sample_std(std::span<const double> values);

struct MedianIqr {
  double median = 0.0;
  double q1 = 0.0;
  double q3 = 0.0;
  std::size_t count = 0;
};

std::optional<MedianIqr> median_iqr(std::span<const double> values);

/// "M.MM [L.LL-U.UU]".
std::string format_median_iqr(const MedianIqr& m);

}  // namespace flairkit
