// TVOX voxel files, CRC32 checksums and PGM slice images.
//
// TVOX v1 layout:
//   bytes 0-3   'T' 'V' 'O' 'X'
//   byte  4     version (1)
//   byte  5     number of axes (2..4)
//   then        one little-endian uint32 per axis
//   then        voxel bits in storage order, 8 per byte, least significant
//               bit first; unused bits of the last byte are zero

#pragma once

#include <algorithm>
#include <cctype>
#include <cstdint>
#include <fstream>
#include <iterator>
#include <stdexcept>
#include <string>
#include <vector>

#include <zlib.h>

#include "topovox/grid.hpp"

namespace topovox {

class format_error : public std::runtime_error {
 public:
  format_error(const std::string& what, std::size_t offset)
      : std::runtime_error(what + " (at byte " + std::to_string(offset) + ")"), offset_(offset) {}
  std::size_t offset() const { return offset_; }

 private:
  std::size_t offset_;
};

class io_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline constexpr std::uint8_t kTvoxVersion = 1;

inline std::size_t tvox_header_size(int ndim) { return 6 + 4 * static_cast<std::size_t>(ndim); }

inline std::vector<std::uint8_t> encode_voxels(const BinaryGrid& g) {
  std::vector<std::uint8_t> out{'T', 'V', 'O', 'X', kTvoxVersion, static_cast<std::uint8_t>(g.ndim())};
  for (int d : g.dims()) {
    const auto v = static_cast<std::uint32_t>(d);
    for (int b = 0; b < 4; ++b) out.push_back(static_cast<std::uint8_t>(v >> (8 * b)));
  }
  const std::size_t payload = (g.size() + 7) / 8;
  const auto& words = g.words();
  for (std::size_t k = 0; k < payload; ++k) out.push_back(static_cast<std::uint8_t>(words[k / 8] >> (8 * (k % 8))));
  return out;
}

inline BinaryGrid decode_voxels(const std::vector<std::uint8_t>& bytes) {
  static constexpr std::uint8_t magic[4] = {'T', 'V', 'O', 'X'};
  for (std::size_t i = 0; i < 4; ++i) {
    if (i >= bytes.size()) throw format_error("TVOX: truncated magic", bytes.size());
    if (bytes[i] != magic[i]) throw format_error("TVOX: bad magic", i);
  }
  if (bytes.size() < 6) throw format_error("TVOX: truncated header", bytes.size());
  if (bytes[4] != kTvoxVersion) throw format_error("TVOX: unsupported version " + std::to_string(bytes[4]), 4);
  const int n = bytes[5];
  if (n < 2 || n > kMaxDim) throw format_error("TVOX: unsupported axis count " + std::to_string(n), 5);
  if (bytes.size() < tvox_header_size(n)) throw format_error("TVOX: truncated header", bytes.size());
  std::vector<int> dims;
  std::size_t total = 1;
  for (int a = 0; a < n; ++a) {
    const std::size_t at = 6 + 4 * static_cast<std::size_t>(a);
    std::uint32_t v = 0;
    for (int b = 0; b < 4; ++b) v |= static_cast<std::uint32_t>(bytes[at + static_cast<std::size_t>(b)]) << (8 * b);
    if (v == 0 || v > 0x7fffffffu) throw format_error("TVOX: bad axis length " + std::to_string(v), at);
    dims.push_back(static_cast<int>(v));
    total *= v;
    if (total > (std::size_t{1} << 40)) throw format_error("TVOX: grid too large", at);
  }
  const std::size_t head = tvox_header_size(n);
  const std::size_t payload = (total + 7) / 8;
  if (bytes.size() < head + payload) throw format_error("TVOX: truncated voxel data", bytes.size());
  if (bytes.size() > head + payload) throw format_error("TVOX: trailing bytes", head + payload);
  if (total % 8 != 0 && (bytes.back() >> (total % 8)) != 0)
    throw format_error("TVOX: nonzero padding bits", bytes.size() - 1);
  BinaryGrid g(dims);
  for (std::size_t i = 0; i < total; ++i)
    if ((bytes[head + i / 8] >> (i % 8)) & 1u) g.set(i, true);
  return g;
}

inline std::vector<std::uint8_t> read_file_bytes(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw io_error("cannot open '" + path + "' for reading");
  return std::vector<std::uint8_t>(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

inline void write_file_bytes(const std::string& path, const std::vector<std::uint8_t>& bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw io_error("cannot open '" + path + "' for writing");
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw io_error("write to '" + path + "' failed");
}

inline void write_voxels(const std::string& path, const BinaryGrid& g) { write_file_bytes(path, encode_voxels(g)); }

inline BinaryGrid read_voxels(const std::string& path) { return decode_voxels(read_file_bytes(path)); }

inline std::uint32_t crc32_of(const std::vector<std::uint8_t>& bytes) {
  uLong crc = crc32(0L, Z_NULL, 0);
  std::size_t done = 0;
  while (done < bytes.size()) {
    const auto chunk = static_cast<uInt>(std::min<std::size_t>(bytes.size() - done, 1u << 30));
    crc = crc32(crc, bytes.data() + done, chunk);
    done += chunk;
  }
  return static_cast<std::uint32_t>(crc);
}

/// "crc32:" followed by eight lowercase hex digits.
inline std::string checksum_string(const std::vector<std::uint8_t>& bytes) {
  static constexpr char hex[] = "0123456789abcdef";
  const std::uint32_t c = crc32_of(bytes);
  std::string s = "crc32:";
  for (int k = 7; k >= 0; --k) s += hex[(c >> (4 * k)) & 0xf];
  return s;
}

/// The 2D section through `g` where every axis with fixed[a] >= 0 is held at
/// that coordinate. Exactly two axes must be free (fixed[a] < 0); the first
/// becomes the row axis.
inline BinaryGrid slice_2d(const BinaryGrid& g, const std::vector<int>& fixed) {
  if (static_cast<int>(fixed.size()) != g.ndim()) throw dimension_error("slice: need one entry per axis");
  std::vector<int> free_axes;
  for (int a = 0; a < g.ndim(); ++a) {
    const int v = fixed[static_cast<std::size_t>(a)];
    if (v < 0)
      free_axes.push_back(a);
    else if (v >= g.dim(a))
      throw index_error("slice: coordinate " + std::to_string(v) + " out of range on axis " + std::to_string(a));
  }
  if (free_axes.size() != 2) throw dimension_error("slice: exactly two axes must be free");
  BinaryGrid out({g.dim(free_axes[0]), g.dim(free_axes[1])});
  Coord c = Coord::zeros(g.ndim());
  for (int a = 0; a < g.ndim(); ++a) c[a] = std::max(0, fixed[static_cast<std::size_t>(a)]);
  for (int r = 0; r < out.dim(0); ++r)
    for (int k = 0; k < out.dim(1); ++k) {
      c[free_axes[0]] = r;
      c[free_axes[1]] = k;
      if (g.at(c)) out.set(Coord{r, k}, true);
    }
  return out;
}

/// Binary P5 graymap: foreground 255, background 0.
inline std::vector<std::uint8_t> encode_pgm(const BinaryGrid& slice) {
  if (slice.ndim() != 2) throw dimension_error("pgm: 2D grids only");
  const std::string head = "P5\n" + std::to_string(slice.dim(1)) + " " + std::to_string(slice.dim(0)) + "\n255\n";
  std::vector<std::uint8_t> out(head.begin(), head.end());
  for (std::size_t i = 0; i < slice.size(); ++i) out.push_back(slice.get(i) ? 255 : 0);
  return out;
}

inline BinaryGrid decode_pgm(const std::vector<std::uint8_t>& bytes) {
  std::size_t pos = 0;
  auto token = [&]() {
    while (pos < bytes.size() && std::isspace(bytes[pos])) ++pos;
    std::string t;
    while (pos < bytes.size() && !std::isspace(bytes[pos])) t += static_cast<char>(bytes[pos++]);
    return t;
  };
  if (token() != "P5") throw format_error("PGM: not a P5 file", 0);
  const int w = std::stoi(token()), h = std::stoi(token());
  if (token() != "255") throw format_error("PGM: unsupported maxval", pos);
  ++pos;
  if (bytes.size() != pos + static_cast<std::size_t>(w) * static_cast<std::size_t>(h))
    throw format_error("PGM: wrong payload size", pos);
  BinaryGrid g({h, w});
  for (std::size_t i = 0; i < g.size(); ++i) g.set(i, bytes[pos + i] != 0);
  return g;
}

}  // namespace topovox
