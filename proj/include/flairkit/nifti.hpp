#pragma once

#include <filesystem>

#include "flairkit/volume.hpp"

namespace flairkit {

enum class NiftiErrorKind { MissingFile, MalformedHeader, UnsupportedDatatype, Io };

class NiftiError : public Error {
 public:
  NiftiError(NiftiErrorKind kind, const std::string& what) : Error(what), kind_(kind) {}
  NiftiErrorKind kind() const { return kind_; }

 private:
  NiftiErrorKind kind_;
};

/// Reads a single-file NIfTI-1 image (.nii), gzip-compressed or not. Compression
/// is detected from the leading magic bytes, never from the file extension.
/// Integer and float datatypes are converted to float32 with scl_slope/scl_inter
/// applied.
ScalarVolume load_volume(const std::filesystem::path& path);

/// load_volume followed by value != 0.
BinaryMask load_mask(const std::filesystem::path& path);

/// load_volume followed by a [0,1] range check.
ProbabilityMap load_probability(const std::filesystem::path& path);

// Output is gzip-compressed iff the path ends in ".gz". Intensities and
// probabilities are written as float32, masks as uint8.
void save_volume(const ScalarVolume& volume, const std::filesystem::path& path);
void save_volume(const ProbabilityMap& prob, const std::filesystem::path& path);
void save_volume(const BinaryMask& mask, const std::filesystem::path& path);

}  // namespace flairkit
