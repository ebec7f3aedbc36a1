#pragma once

// Brute-force reference implementations. Deliberately share no code with the
// production metrics, labeling or distance transform; inputs are capped at
// 32^3 voxels.

#include "flairkit/volume.hpp"

namespace flairkit::oracle {

inline constexpr std::int64_t kMaxVoxels = 32 * 32 * 32;

/// Set counting over voxel index sets.
double dice(const BinaryMask& a, const BinaryMask& b);

/// All-pairs boundary distances, explicit sort, (N+1)-rank interpolated 95th
/// percentile.
double hd95(const BinaryMask& a, const BinaryMask& b);

/// Flood fill (explicit stack) from every unlabeled foreground voxel in raster
/// order; connectivity is 6 or 26.
std::vector<std::uint32_t> components(const BinaryMask& mask, int connectivity);

/// True iff both labelings induce the same partition (0 must map to 0).
bool same_partition(const std::vector<std::uint32_t>& a, const std::vector<std::uint32_t>& b);

}  // namespace flairkit::oracle
