// Binary morphology on n-dimensional grids, plus topology-preserving
// thinning (2D) and homology-gated dilation (any dimension).
//
// Out-of-range voxels read as background unless a call says otherwise.

#pragma once

#include <algorithm>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "topovox/grid.hpp"
#include "topovox/homology.hpp"
#include "topovox/noise.hpp"

namespace topovox {

class invalid_element_error : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

inline constexpr int kMaxElementExtent = 9;

struct StructuringElement {
  BinaryGrid mask;
  Coord origin;

  StructuringElement() = default;
  StructuringElement(BinaryGrid m, Coord o) : mask(std::move(m)), origin(o) { validate(); }

  void validate() const {
    if (static_cast<int>(origin.size()) != mask.ndim())
      throw invalid_element_error("structuring element: origin has wrong dimension");
    for (int a = 0; a < mask.ndim(); ++a)
      if (mask.dim(a) > kMaxElementExtent)
        throw invalid_element_error("structuring element: extent above " + std::to_string(kMaxElementExtent));
    if (!mask.in_range(origin)) throw invalid_element_error("structuring element: origin outside mask");
  }

  int ndim() const { return mask.ndim(); }

  /// Offsets of the set voxels relative to the origin.
  std::vector<Coord> offsets() const {
    std::vector<Coord> out;
    for_each_voxel(mask.dims(), [&](const Coord& c, std::size_t flat) {
      if (mask.get(flat)) out.push_back(c - origin);
    });
    return out;
  }
};

/// A hit mask and a miss mask sharing shape and origin.
struct HitMissPair {
  StructuringElement hit;
  StructuringElement miss;

  HitMissPair() = default;
  HitMissPair(StructuringElement h, StructuringElement m) : hit(std::move(h)), miss(std::move(m)) { validate(); }

  void validate() const {
    if (hit.mask.dims() != miss.mask.dims() || hit.origin != miss.origin)
      throw invalid_element_error("hit-or-miss pair: masks differ in shape or origin");
    BinaryGrid both = hit.mask;
    both &= miss.mask;
    if (both.count_ones() != 0) throw invalid_element_error("hit-or-miss pair: hit and miss overlap");
  }

  /// Builds a 3x3 pair from rows of '1' (hit), '0' (miss) and 'x' (either).
  static HitMissPair from_pattern(const std::vector<std::string>& rows) {
    const int h = static_cast<int>(rows.size());
    const int w = h ? static_cast<int>(rows[0].size()) : 0;
    if (h == 0 || h % 2 == 0 || w % 2 == 0) throw invalid_element_error("pattern must have odd side lengths");
    BinaryGrid hit({h, w}), miss({h, w});
    for (int r = 0; r < h; ++r) {
      if (static_cast<int>(rows[static_cast<std::size_t>(r)].size()) != w)
        throw invalid_element_error("pattern rows differ in length");
      for (int c = 0; c < w; ++c) {
        const char ch = rows[static_cast<std::size_t>(r)][static_cast<std::size_t>(c)];
        if (ch == '1')
          hit.set(Coord{r, c}, true);
        else if (ch == '0')
          miss.set(Coord{r, c}, true);
        else if (ch != 'x')
          throw invalid_element_error(std::string("pattern: unexpected character '") + ch + "'");
      }
    }
    const Coord mid{h / 2, w / 2};
    return HitMissPair(StructuringElement(hit, mid), StructuringElement(miss, mid));
  }
};

// ---- element builders ----------------------------------------------------

/// Centre plus its face neighbours.
inline StructuringElement unit_ball(int ndim) {
  BinaryGrid m(std::vector<int>(static_cast<std::size_t>(ndim), 3));
  Coord mid = Coord::zeros(ndim);
  for (int a = 0; a < ndim; ++a) mid[a] = 1;
  m.set(mid, true);
  for (const auto& o : neighbor_offsets(ndim, Adjacency::face)) m.set(mid + o, true);
  return StructuringElement(m, mid);
}

/// Euclidean ball, offsets with |o|^2 <= r^2. Not limited to 9 voxels per axis.
inline std::vector<Coord> ball_offsets(int ndim, int radius) {
  if (radius < 0) throw invalid_element_error("ball: negative radius");
  std::vector<Coord> out;
  std::vector<int> dims(static_cast<std::size_t>(ndim), 2 * radius + 1);
  for_each_voxel(dims, [&](const Coord& c, std::size_t) {
    Coord o = c;
    long long d2 = 0;
    for (int a = 0; a < ndim; ++a) {
      o[a] -= radius;
      d2 += static_cast<long long>(o[a]) * o[a];
    }
    if (d2 <= static_cast<long long>(radius) * radius) out.push_back(o);
  });
  return out;
}

inline StructuringElement ball(int ndim, int radius) {
  BinaryGrid m(std::vector<int>(static_cast<std::size_t>(ndim), 2 * radius + 1));
  Coord mid = Coord::zeros(ndim);
  for (int a = 0; a < ndim; ++a) mid[a] = radius;
  for (const auto& o : ball_offsets(ndim, radius)) m.set(mid + o, true);
  return StructuringElement(m, mid);
}

/// All-ones box with the origin at its centre (lower-middle for even sides).
inline StructuringElement box(const std::vector<int>& extent) {
  BinaryGrid m(extent, true);
  Coord mid = Coord::zeros(static_cast<int>(extent.size()));
  for (std::size_t a = 0; a < extent.size(); ++a) mid[a] = (extent[a] - 1) / 2;
  return StructuringElement(m, mid);
}

/// Point reflection through the origin.
inline StructuringElement reflect(const StructuringElement& b) {
  const int n = b.ndim();
  BinaryGrid m(b.mask.dims());
  Coord origin = Coord::zeros(n);
  for (int a = 0; a < n; ++a) origin[a] = b.mask.dim(a) - 1 - b.origin[a];
  for_each_voxel(b.mask.dims(), [&](const Coord& c, std::size_t flat) {
    if (!b.mask.get(flat)) return;
    Coord r = c;
    for (int a = 0; a < n; ++a) r[a] = b.mask.dim(a) - 1 - c[a];
    m.set(r, true);
  });
  return StructuringElement(m, origin);
}

/// 90 degree rotation of a 2D pair: (r, c) -> (c, h-1-r).
inline HitMissPair rotate90(const HitMissPair& p) {
  auto rot = [](const StructuringElement& e) {
    const int h = e.mask.dim(0), w = e.mask.dim(1);
    BinaryGrid m({w, h});
    for (int r = 0; r < h; ++r)
      for (int c = 0; c < w; ++c)
        if (e.mask.at(Coord{r, c})) m.set(Coord{c, h - 1 - r}, true);
    return StructuringElement(m, Coord{e.origin[1], h - 1 - e.origin[0]});
  };
  return HitMissPair(rot(p.hit), rot(p.miss));
}

// ---- basic operators -----------------------------------------------------

namespace detail {

inline void check_element_dim(const BinaryGrid& m, int ndim) {
  if (m.ndim() != ndim) throw dimension_error("morphology: element and grid dimensions differ");
}

inline BinaryGrid dilate_offsets(const BinaryGrid& m, const std::vector<Coord>& offsets) {
  BinaryGrid out(m.dims());
  for_each_voxel(m.dims(), [&](const Coord& c, std::size_t flat) {
    if (!m.get(flat)) return;
    for (const auto& o : offsets) {
      const Coord t = c + o;
      if (m.in_range(t)) out.set(t, true);
    }
  });
  return out;
}

}  // namespace detail

/// Minkowski sum {m + b}, clipped to the grid.
inline BinaryGrid dilate(const BinaryGrid& m, const StructuringElement& b) {
  detail::check_element_dim(m, b.ndim());
  return detail::dilate_offsets(m, b.offsets());
}

/// Voxels p with p + b in m for every b; out-of-range reads as background.
inline BinaryGrid erode(const BinaryGrid& m, const StructuringElement& b) {
  detail::check_element_dim(m, b.ndim());
  const auto offsets = b.offsets();
  BinaryGrid out(m.dims());
  for_each_voxel(m.dims(), [&](const Coord& c, std::size_t flat) {
    for (const auto& o : offsets)
      if (!m.at(c + o)) return;
    out.set(flat, true);
  });
  return out;
}

namespace detail {

inline bool read_with_outside(const BinaryGrid& m, const Coord& c, bool outside) {
  return m.in_range(c) ? m.at(c) : outside;
}

inline bool matches(const BinaryGrid& m, const Coord& c, const std::vector<Coord>& hit, const std::vector<Coord>& miss,
                    bool outside) {
  for (const auto& o : hit)
    if (!read_with_outside(m, c + o, outside)) return false;
  for (const auto& o : miss)
    if (read_with_outside(m, c + o, outside)) return false;
  return true;
}

}  // namespace detail

/// Voxels where the hit mask fits inside m and the miss mask fits outside it.
/// `outside` is the value read beyond the grid.
inline BinaryGrid hit_or_miss(const BinaryGrid& m, const HitMissPair& pair, bool outside = false) {
  pair.validate();
  detail::check_element_dim(m, pair.hit.ndim());
  const auto hit = pair.hit.offsets();
  const auto miss = pair.miss.offsets();
  BinaryGrid out(m.dims());
  for_each_voxel(m.dims(), [&](const Coord& c, std::size_t flat) {
    if (detail::matches(m, c, hit, miss, outside)) out.set(flat, true);
  });
  return out;
}

// ---- 2D thinning -----------------------------------------------------------

/// Golay L pair and its 90 degree rotation series, eight elements in all.
/// With `Adjacency::full` each deletion is simple for 8-connected foreground;
/// with `Adjacency::face` the corner element demands its diagonal so that
/// 4-connected foreground stays intact.
inline std::vector<HitMissPair> thinning_elements(Adjacency conn) {
  const HitMissPair edge = HitMissPair::from_pattern({"000", "x1x", "111"});
  const HitMissPair corner = conn == Adjacency::full ? HitMissPair::from_pattern({"x00", "110", "x1x"})
                                                     : HitMissPair::from_pattern({"x00", "110", "11x"});
  std::vector<HitMissPair> out;
  HitMissPair e = edge, k = corner;
  for (int r = 0; r < 4; ++r) {
    out.push_back(e);
    out.push_back(k);
    e = rotate90(e);
    k = rotate90(k);
  }
  return out;
}

/// One element at a time, matches are found in parallel and then removed in
/// storage order, each re-tested against the current image so that every
/// single deletion is a simple-point deletion.
inline BinaryGrid thin_homotopic_2d(const BinaryGrid& m, int max_iter, Adjacency conn = Adjacency::full,
                                    bool outside = false) {
  if (m.ndim() != 2) throw dimension_error("thin_homotopic_2d: 2D grids only");
  if (max_iter < 0) throw std::invalid_argument("thin_homotopic_2d: negative iteration count");
  const auto elements = thinning_elements(conn);
  struct Compiled {
    std::vector<Coord> hit, miss;
  };
  std::vector<Compiled> compiled;
  for (const auto& e : elements) compiled.push_back({e.hit.offsets(), e.miss.offsets()});

  BinaryGrid cur = m;
  for (int it = 0; it < max_iter; ++it) {
    bool changed = false;
    for (const auto& e : compiled) {
      std::vector<std::size_t> hits;
      for_each_voxel(cur.dims(), [&](const Coord& c, std::size_t flat) {
        if (cur.get(flat) && detail::matches(cur, c, e.hit, e.miss, outside)) hits.push_back(flat);
      });
      for (std::size_t flat : hits) {
        if (!detail::matches(cur, cur.coord_of(flat), e.hit, e.miss, outside)) continue;
        cur.set(flat, false);
        changed = true;
      }
    }
    if (!changed) break;
  }
  return cur;
}

/// Thins the complement, treating everything beyond the grid as complement,
/// so the foreground grows without changing its topology.
inline BinaryGrid thicken_background(const BinaryGrid& m, int iterations) {
  if (m.ndim() != 2) throw dimension_error("thicken_background: 2D grids only");
  return thin_homotopic_2d(m.complement(), iterations, Adjacency::face, true).complement();
}

// ---- homology-gated dilation ------------------------------------------------

struct SafeDilateReport {
  std::size_t candidates = 0;
  std::size_t accepted = 0;
  std::size_t rejected_unsafe = 0;
  std::size_t skipped_by_bias = 0;
};

/// Uniform double in [0, 1) from a counter.
inline double unit_uniform(std::uint64_t seed, std::uint64_t counter) {
  return static_cast<double>(mix64(seed ^ mix64(counter)) >> 11) * 0x1.0p-53;
}

/// Each iteration takes the voxels of dilate(m, b) \ m and tries to set them
/// one at a time; a flip is kept only if it leaves the Betti numbers of its
/// neighbourhood (foreground and background) unchanged. With a bias field,
/// candidates go in descending noise order and are attempted with probability
/// (noise + 1) / 2.
inline BinaryGrid homology_safe_dilate(const BinaryGrid& m, const StructuringElement& b, int iterations,
                                       const NoiseField* bias = nullptr, std::uint64_t seed = 0,
                                       SafeDilateReport* report = nullptr, int safety_radius = 1) {
  detail::check_element_dim(m, b.ndim());
  if (iterations < 0) throw std::invalid_argument("homology_safe_dilate: negative iteration count");
  if (bias && bias->values.size() != m.size()) throw dimension_error("homology_safe_dilate: bias field has wrong size");
  const auto offsets = b.offsets();
  BinaryGrid cur = m;
  SafeDilateReport local;
  for (int it = 0; it < iterations; ++it) {
    BinaryGrid grown = detail::dilate_offsets(cur, offsets);
    std::vector<std::size_t> candidates;
    for (std::size_t f = 0; f < cur.size(); ++f)
      if (grown.get(f) && !cur.get(f)) candidates.push_back(f);
    if (bias)
      std::stable_sort(candidates.begin(), candidates.end(),
                       [&](std::size_t x, std::size_t y) { return bias->values[x] > bias->values[y]; });
    local.candidates += candidates.size();
    const std::uint64_t iter_seed = derive_seed(seed, static_cast<std::uint64_t>(it));
    for (std::size_t f : candidates) {
      if (bias) {
        const double p = (bias->values[f] + 1.0) / 2.0;
        if (unit_uniform(iter_seed, f) >= p) {
          ++local.skipped_by_bias;
          continue;
        }
      }
      if (is_local_flip_safe(cur, cur.coord_of(f), true, safety_radius)) {
        cur.set(f, true);
        ++local.accepted;
      } else {
        ++local.rejected_unsafe;
      }
    }
  }
  if (report) *report = local;
  return cur;
}

inline BinaryGrid homology_safe_dilate(const BinaryGrid& m, int iterations) {
  return homology_safe_dilate(m, unit_ball(m.ndim()), iterations);
}

}  // namespace topovox
