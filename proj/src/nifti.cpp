#include "flairkit/nifti.hpp"

#include <zlib.h>

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>

namespace flairkit {

namespace {

constexpr std::size_t kHeaderSize = 348;
constexpr std::size_t kDataOffset = 352;

// NIfTI-1 datatype codes.
enum : std::int16_t {
  kUInt8 = 2,
  kInt16 = 4,
  kInt32 = 8,
  kFloat32 = 16,
  kFloat64 = 64,
  kInt8 = 256,
  kUInt16 = 512,
  kUInt32 = 768,
  kInt64 = 1024,
  kUInt64 = 1280,
};

// Field offsets inside the 348-byte header.
namespace off {
constexpr std::size_t sizeof_hdr = 0;
constexpr std::size_t dim = 40;
constexpr std::size_t datatype = 70;
constexpr std::size_t bitpix = 72;
constexpr std::size_t pixdim = 76;
constexpr std::size_t vox_offset = 108;
constexpr std::size_t scl_slope = 112;
constexpr std::size_t scl_inter = 116;
constexpr std::size_t xyzt_units = 123;
constexpr std::size_t descrip = 148;
constexpr std::size_t qform_code = 252;
constexpr std::size_t sform_code = 254;
constexpr std::size_t quatern_b = 256;
constexpr std::size_t qoffset_x = 268;
constexpr std::size_t srow_x = 280;
constexpr std::size_t magic = 344;
}  // namespace off

[[noreturn]] void fail(NiftiErrorKind kind, const std::filesystem::path& path, const std::string& msg) {
  throw NiftiError(kind, path.string() + ": " + msg);
}

template <class T>
T byteswap_value(T v) {
  unsigned char bytes[sizeof(T)];
  std::memcpy(bytes, &v, sizeof(T));
  std::reverse(std::begin(bytes), std::end(bytes));
  std::memcpy(&v, bytes, sizeof(T));
  return v;
}

class HeaderReader {
 public:
  HeaderReader(const unsigned char* base, bool swap) : base_(base), swap_(swap) {}

  template <class T>
  T get(std::size_t offset) const {
    T v;
    std::memcpy(&v, base_ + offset, sizeof(T));
    return swap_ ? byteswap_value(v) : v;
  }

 private:
  const unsigned char* base_;
  bool swap_;
};

class HeaderWriter {
 public:
  explicit HeaderWriter(std::vector<unsigned char>& buf) : buf_(buf) {}

  template <class T>
  void put(std::size_t offset, T v) {
    std::memcpy(buf_.data() + offset, &v, sizeof(T));
  }

 private:
  std::vector<unsigned char>& buf_;
};

std::vector<unsigned char> read_file(const std::filesystem::path& path) {
  std::error_code ec;
  if (!std::filesystem::is_regular_file(path, ec)) {
    fail(NiftiErrorKind::MissingFile, path, "no such file");
  }
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(NiftiErrorKind::Io, path, "cannot open for reading");
  std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (in.bad()) fail(NiftiErrorKind::Io, path, "read error");
  return bytes;
}

bool is_gzip(const std::vector<unsigned char>& bytes) {
  return bytes.size() >= 2 && bytes[0] == 0x1f && bytes[1] == 0x8b;
}

std::vector<unsigned char> gunzip(const std::vector<unsigned char>& in, const std::filesystem::path& path) {
  z_stream zs{};
  if (inflateInit2(&zs, 15 + 16) != Z_OK) fail(NiftiErrorKind::Io, path, "zlib init failed");
  std::vector<unsigned char> out;
  out.resize(std::max<std::size_t>(in.size() * 4, 1 << 16));
  zs.next_in = const_cast<Bytef*>(in.data());
  zs.avail_in = static_cast<uInt>(in.size());
  std::size_t produced = 0;
  int rc = Z_OK;
  while (true) {
    if (produced == out.size()) out.resize(out.size() * 2);
    zs.next_out = out.data() + produced;
    zs.avail_out = static_cast<uInt>(out.size() - produced);
    rc = inflate(&zs, Z_NO_FLUSH);
    produced = out.size() - zs.avail_out;
    if (rc == Z_STREAM_END) {
      // Concatenated gzip members are legal; keep going if input remains.
      if (zs.avail_in == 0) break;
      inflateReset(&zs);
      continue;
    }
    if (rc == Z_BUF_ERROR && zs.avail_in == 0) break;  // truncated stream
    if (rc != Z_OK && rc != Z_BUF_ERROR) {
      inflateEnd(&zs);
      fail(NiftiErrorKind::MalformedHeader, path, "corrupt gzip stream");
    }
  }
  inflateEnd(&zs);
  out.resize(produced);
  return out;
}

std::vector<unsigned char> gzip(const std::vector<unsigned char>& in, const std::filesystem::path& path) {
  z_stream zs{};
  if (deflateInit2(&zs, 6, Z_DEFLATED, 15 + 16, 8, Z_DEFAULT_STRATEGY) != Z_OK) {
    fail(NiftiErrorKind::Io, path, "zlib init failed");
  }
  std::vector<unsigned char> out(deflateBound(&zs, static_cast<uLong>(in.size())) + 64);
  zs.next_in = const_cast<Bytef*>(in.data());
  zs.avail_in = static_cast<uInt>(in.size());
  zs.next_out = out.data();
  zs.avail_out = static_cast<uInt>(out.size());
  const int rc = deflate(&zs, Z_FINISH);
  const std::size_t produced = out.size() - zs.avail_out;
  deflateEnd(&zs);
  if (rc != Z_STREAM_END) fail(NiftiErrorKind::Io, path, "gzip compression failed");
  out.resize(produced);
  return out;
}

std::size_t bytes_per_voxel(std::int16_t datatype) {
  switch (datatype) {
    case kUInt8:
    case kInt8: return 1;
    case kInt16:
    case kUInt16: return 2;
    case kInt32:
    case kUInt32:
    case kFloat32: return 4;
    case kFloat64:
    case kInt64:
    case kUInt64: return 8;
    default: return 0;
  }
}

template <class T>
void convert(const unsigned char* src, std::size_t n, bool swap, double slope, double inter,
             std::vector<float>& dst) {
  dst.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    T v;
    std::memcpy(&v, src + i * sizeof(T), sizeof(T));
    if (swap) v = byteswap_value(v);
    dst[i] = static_cast<float>(static_cast<double>(v) * slope + inter);
  }
}

bool ends_with_gz(const std::filesystem::path& path) {
  const std::string s = path.string();
  return s.size() >= 3 && s.compare(s.size() - 3, 3, ".gz") == 0;
}

void write_image(const Geometry& geometry, std::int16_t datatype, const void* data, std::size_t data_bytes,
                 const std::filesystem::path& path) {
  for (auto d : geometry.dims) {
    if (d > 32767) fail(NiftiErrorKind::Io, path, "dimension exceeds the NIfTI-1 limit of 32767");
  }
  std::vector<unsigned char> buf(kDataOffset + data_bytes, 0);
  HeaderWriter h(buf);
  h.put<std::int32_t>(off::sizeof_hdr, 348);
  h.put<std::int16_t>(off::dim, 3);
  for (int a = 0; a < 3; ++a) h.put<std::int16_t>(off::dim + 2 * (a + 1), static_cast<std::int16_t>(geometry.dims[a]));
  for (int a = 4; a < 8; ++a) h.put<std::int16_t>(off::dim + 2 * a, 1);
  h.put<std::int16_t>(off::datatype, datatype);
  h.put<std::int16_t>(off::bitpix, static_cast<std::int16_t>(8 * bytes_per_voxel(datatype)));

  const Orientation o = geometry.orientation.value_or(Orientation{.qform_code = 1});
  h.put<float>(off::pixdim, o.qfac < 0 ? -1.f : 1.f);
  for (int a = 0; a < 3; ++a) h.put<float>(off::pixdim + 4 * (a + 1), static_cast<float>(geometry.spacing[a]));
  h.put<float>(off::vox_offset, static_cast<float>(kDataOffset));
  h.put<float>(off::scl_slope, 1.f);
  h.put<float>(off::scl_inter, 0.f);
  buf[off::xyzt_units] = 2;  // mm
  const char desc[] = "flairkit";
  std::memcpy(buf.data() + off::descrip, desc, sizeof(desc));

  h.put<std::int16_t>(off::qform_code, o.qform_code);
  h.put<std::int16_t>(off::sform_code, o.sform_code);
  h.put<float>(off::quatern_b, o.quatern_b);
  h.put<float>(off::quatern_b + 4, o.quatern_c);
  h.put<float>(off::quatern_b + 8, o.quatern_d);
  for (int a = 0; a < 3; ++a) {
    h.put<float>(off::qoffset_x + 4 * a, static_cast<float>(geometry.origin[a]));
    auto row = o.srow[a];
    row[3] = static_cast<float>(geometry.origin[a]);
    for (int c = 0; c < 4; ++c) h.put<float>(off::srow_x + 16 * a + 4 * c, row[c]);
  }
  std::memcpy(buf.data() + off::magic, "n+1\0", 4);
  std::memcpy(buf.data() + kDataOffset, data, data_bytes);

  const auto& payload = ends_with_gz(path) ? gzip(buf, path) : buf;
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail(NiftiErrorKind::Io, path, "cannot open for writing");
  out.write(reinterpret_cast<const char*>(payload.data()), static_cast<std::streamsize>(payload.size()));
  out.flush();
  if (!out) fail(NiftiErrorKind::Io, path, "write failed");
}

}  // namespace

ScalarVolume load_volume(const std::filesystem::path& path) {
  std::vector<unsigned char> bytes = read_file(path);
  if (is_gzip(bytes)) bytes = gunzip(bytes, path);
  if (bytes.size() < kHeaderSize) fail(NiftiErrorKind::MalformedHeader, path, "truncated header");

  bool swap = false;
  {
    std::int32_t sz;
    std::memcpy(&sz, bytes.data(), 4);
    if (sz != 348) {
      if (byteswap_value(sz) != 348) fail(NiftiErrorKind::MalformedHeader, path, "bad sizeof_hdr");
      swap = true;
    }
  }
  if (std::memcmp(bytes.data() + off::magic, "n+1\0", 4) != 0) {
    fail(NiftiErrorKind::MalformedHeader, path, "not a single-file NIfTI-1 image (magic)");
  }
  const HeaderReader h(bytes.data(), swap);

  const std::int16_t ndim = h.get<std::int16_t>(off::dim);
  if (ndim < 1 || ndim > 7) fail(NiftiErrorKind::MalformedHeader, path, "dim[0] out of range");
  Geometry geometry;
  for (int a = 0; a < 3; ++a) {
    geometry.dims[a] = a < ndim ? h.get<std::int16_t>(off::dim + 2 * (a + 1)) : 1;
    if (geometry.dims[a] <= 0) fail(NiftiErrorKind::MalformedHeader, path, "non-positive dimension");
  }
  for (int a = 3; a < ndim; ++a) {
    if (h.get<std::int16_t>(off::dim + 2 * (a + 1)) > 1) {
      fail(NiftiErrorKind::MalformedHeader, path, "only single 3D volumes are supported");
    }
  }
  for (int a = 0; a < 3; ++a) {
    const float p = a < ndim ? h.get<float>(off::pixdim + 4 * (a + 1)) : 1.f;
    const double s = std::abs(static_cast<double>(p));
    if (!(s > 0.0) || !std::isfinite(s)) fail(NiftiErrorKind::MalformedHeader, path, "non-positive spacing");
    geometry.spacing[a] = s;
  }

  Orientation o;
  o.qform_code = h.get<std::int16_t>(off::qform_code);
  o.sform_code = h.get<std::int16_t>(off::sform_code);
  o.quatern_b = h.get<float>(off::quatern_b);
  o.quatern_c = h.get<float>(off::quatern_b + 4);
  o.quatern_d = h.get<float>(off::quatern_b + 8);
  o.qfac = h.get<float>(off::pixdim) < 0 ? -1.f : 1.f;
  for (int a = 0; a < 3; ++a)
    for (int c = 0; c < 4; ++c) o.srow[a][c] = h.get<float>(off::srow_x + 16 * a + 4 * c);
  for (int a = 0; a < 3; ++a) {
    if (o.qform_code > 0) {
      geometry.origin[a] = h.get<float>(off::qoffset_x + 4 * a);
    } else if (o.sform_code > 0) {
      geometry.origin[a] = o.srow[a][3];
    }
  }
  if (o.qform_code > 0 || o.sform_code > 0) geometry.orientation = o;

  const std::int16_t datatype = h.get<std::int16_t>(off::datatype);
  const std::size_t bpv = bytes_per_voxel(datatype);
  if (bpv == 0) {
    fail(NiftiErrorKind::UnsupportedDatatype, path, "unsupported datatype code " + std::to_string(datatype));
  }
  const float vox_offset_f = h.get<float>(off::vox_offset);
  if (!(vox_offset_f >= 0.f) || !std::isfinite(vox_offset_f)) {
    fail(NiftiErrorKind::MalformedHeader, path, "invalid vox_offset");
  }
  const auto vox_offset = std::max<std::size_t>(static_cast<std::size_t>(vox_offset_f), kHeaderSize);
  const auto n = static_cast<std::size_t>(geometry.voxel_count());
  if (bytes.size() < vox_offset + n * bpv) fail(NiftiErrorKind::MalformedHeader, path, "truncated voxel data");

  double slope = h.get<float>(off::scl_slope);
  double inter = h.get<float>(off::scl_inter);
  if (slope == 0.0 || !std::isfinite(slope) || !std::isfinite(inter)) {
    slope = 1.0;
    inter = 0.0;
  }

  std::vector<float> data;
  const unsigned char* src = bytes.data() + vox_offset;
  switch (datatype) {
    case kUInt8: convert<std::uint8_t>(src, n, swap, slope, inter, data); break;
    case kInt8: convert<std::int8_t>(src, n, swap, slope, inter, data); break;
    case kInt16: convert<std::int16_t>(src, n, swap, slope, inter, data); break;
    case kUInt16: convert<std::uint16_t>(src, n, swap, slope, inter, data); break;
    case kInt32: convert<std::int32_t>(src, n, swap, slope, inter, data); break;
    case kUInt32: convert<std::uint32_t>(src, n, swap, slope, inter, data); break;
    case kInt64: convert<std::int64_t>(src, n, swap, slope, inter, data); break;
    case kUInt64: convert<std::uint64_t>(src, n, swap, slope, inter, data); break;
    case kFloat32: convert<float>(src, n, swap, slope, inter, data); break;
    case kFloat64: convert<double>(src, n, swap, slope, inter, data); break;
    default: break;
  }
  for (float v : data) {
    if (!std::isfinite(v)) fail(NiftiErrorKind::MalformedHeader, path, "non-finite voxel value");
  }
  return ScalarVolume(std::move(geometry), std::move(data));
}

BinaryMask load_mask(const std::filesystem::path& path) {
  return nonzero_mask(load_volume(path));
}

ProbabilityMap load_probability(const std::filesystem::path& path) {
  ScalarVolume v = load_volume(path);
  ProbabilityMap prob(v.geometry(), std::vector<float>(v.values().begin(), v.values().end()));
  try {
    validate(prob);
  } catch (const Error& e) {
    throw Error(path.string() + ": " + e.what());
  }
  return prob;
}

void save_volume(const ScalarVolume& volume, const std::filesystem::path& path) {
  write_image(volume.geometry(), kFloat32, volume.values().data(), volume.size() * sizeof(float), path);
}

void save_volume(const ProbabilityMap& prob, const std::filesystem::path& path) {
  write_image(prob.geometry(), kFloat32, prob.values().data(), prob.size() * sizeof(float), path);
}

void save_volume(const BinaryMask& mask, const std::filesystem::path& path) {
  write_image(mask.geometry(), kUInt8, mask.values().data(), mask.size(), path);
}

}  // namespace flairkit
