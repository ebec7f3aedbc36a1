#pragma once

#include <filesystem>
#include <random>
#include <string>

#include <unistd.h>

#include "flairkit/volume.hpp"

namespace testing {

using namespace flairkit;

inline Geometry geom(std::int64_t x, std::int64_t y, std::int64_t z, Vec3 spacing = {1, 1, 1}) {
  Geometry g;
  g.dims = {x, y, z};
  g.spacing = spacing;
  return g;
}

inline void fill_box(BinaryMask& m, Index3 lo, Index3 hi) {
  for (std::int64_t k = lo[2]; k < hi[2]; ++k)
    for (std::int64_t j = lo[1]; j < hi[1]; ++j)
      for (std::int64_t i = lo[0]; i < hi[0]; ++i) m.at(i, j, k) = 1;
}

inline BinaryMask box_mask(const Geometry& g, Index3 lo, Index3 hi) {
  BinaryMask m(g);
  fill_box(m, lo, hi);
  return m;
}

inline BinaryMask random_mask(const Geometry& g, double density, std::mt19937_64& rng) {
  BinaryMask m(g);
  std::bernoulli_distribution d(density);
  for (auto& v : m.values()) v = d(rng) ? 1 : 0;
  return m;
}

/// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    static int counter = 0;
    path_ = std::filesystem::temp_directory_path() /
            ("flairkit_" + tag + "_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

}  // namespace testing
