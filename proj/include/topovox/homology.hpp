// Betti numbers of binary images via cubical complexes over GF(2).
//
// Foreground model: the union of closed unit cubes at 1-voxels (so foreground
// connectivity is full adjacency). Background model: the cubical complex on
// 0-voxel centres whose cells exist when all their corner voxels are 0 (face
// adjacency). The two are homotopy-dual: together they describe the same
// partition of space.
//
// Ranks are computed after greedy elementary collapses, which preserve
// homology and usually shrink a sample to a handful of cells.

#pragma once

#include <array>
#include <bit>
#include <cstddef>
#include <cstdint>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

#include "topovox/gf2.hpp"
#include "topovox/grid.hpp"

namespace topovox {

struct BettiVector {
  std::array<std::int64_t, 4> betti{};
  std::int64_t euler = 0;
  bool reduced = false;

  friend bool operator==(const BettiVector&, const BettiVector&) = default;

  std::int64_t alternating_sum() const { return betti[0] - betti[1] + betti[2] - betti[3]; }

  std::string to_string() const {
    std::string s = "(";
    for (std::size_t k = 0; k < betti.size(); ++k) {
      if (k) s += ",";
      s += std::to_string(betti[k]);
    }
    s += "; chi=" + std::to_string(euler);
    if (reduced) s += ", reduced";
    return s + ")";
  }
};

inline BettiVector make_betti(std::int64_t b0, std::int64_t b1 = 0, std::int64_t b2 = 0, std::int64_t b3 = 0) {
  BettiVector v;
  v.betti = {b0, b1, b2, b3};
  v.euler = v.alternating_sum();
  return v;
}

struct HomologyOptions {
  // Residual complexes with at most this many cells use dense elimination.
  std::size_t dense_threshold = kDefaultDenseThreshold;
  bool collapse = true;
};

namespace detail {

// Cells live on a doubled lattice: an odd coordinate spans a unit interval,
// an even one sits on a lattice plane. Real axes are padded with one absent
// cell on either side so that neighbour lookups never leave the array.
struct CellLattice {
  int ndim = 0;
  std::array<int, kMaxDim> ext{1, 1, 1, 1};
  std::array<std::size_t, kMaxDim> stride{};
  std::vector<std::uint8_t> present;
  std::vector<std::uint8_t> oddmask;

  void init(int n, const std::array<int, kMaxDim>& unpadded) {
    ndim = n;
    for (int a = 0; a < kMaxDim; ++a) ext[a] = a < n ? unpadded[a] + 2 : 1;
    stride[kMaxDim - 1] = 1;
    for (int a = kMaxDim - 2; a >= 0; --a) stride[a] = stride[a + 1] * static_cast<std::size_t>(ext[a + 1]);
    const std::size_t total = stride[0] * static_cast<std::size_t>(ext[0]);
    present.assign(total, 0);
    oddmask.assign(total, 0);
    std::size_t idx = 0;
    for (int p0 = 0; p0 < ext[0]; ++p0)
      for (int p1 = 0; p1 < ext[1]; ++p1)
        for (int p2 = 0; p2 < ext[2]; ++p2)
          for (int p3 = 0; p3 < ext[3]; ++p3, ++idx) {
            const std::array<int, kMaxDim> p{p0, p1, p2, p3};
            std::uint8_t m = 0;
            for (int a = 0; a < n; ++a)
              if (p[a] % 2 == 0) m |= static_cast<std::uint8_t>(1u << a);
            oddmask[idx] = m;
          }
  }

  std::size_t size() const { return present.size(); }

  std::size_t index(const std::array<int, kMaxDim>& p) const {
    std::size_t f = 0;
    for (int a = 0; a < kMaxDim; ++a) f += static_cast<std::size_t>(p[a]) * stride[a];
    return f;
  }

  std::array<int, kMaxDim> coords(std::size_t idx) const {
    std::array<int, kMaxDim> p{};
    for (int a = 0; a < kMaxDim; ++a) {
      p[a] = static_cast<int>(idx / stride[a]);
      idx %= stride[a];
    }
    return p;
  }

  int cell_dim(std::size_t idx) const { return std::popcount(oddmask[idx]); }
};

inline std::array<int, kMaxDim> padded_dims(const BinaryGrid& g) {
  std::array<int, kMaxDim> d{1, 1, 1, 1};
  for (int a = 0; a < g.ndim(); ++a) d[a] = g.dim(a);
  return d;
}

// Closed unit cube at every 1-voxel.
inline void fill_foreground(CellLattice& lat, const BinaryGrid& g) {
  const int n = g.ndim();
  std::array<int, kMaxDim> unpadded{};
  for (int a = 0; a < n; ++a) unpadded[a] = 2 * g.dim(a) + 1;
  lat.init(n, unpadded);
  std::array<int, kMaxDim> hi{0, 0, 0, 0};
  for (int a = 0; a < n; ++a) hi[a] = 2;
  for_each_voxel(g.dims(), [&](const Coord& v, std::size_t flat) {
    if (!g.get(flat)) return;
    std::array<int, kMaxDim> base{0, 0, 0, 0};
    for (int a = 0; a < n; ++a) base[a] = 2 * v[a] + 1;
    for (int d0 = 0; d0 <= hi[0]; ++d0)
      for (int d1 = 0; d1 <= hi[1]; ++d1)
        for (int d2 = 0; d2 <= hi[2]; ++d2)
          for (int d3 = 0; d3 <= hi[3]; ++d3)
            lat.present[lat.index({base[0] + d0, base[1] + d1, base[2] + d2, base[3] + d3})] = 1;
  });
}

// Cells on 0-voxel centres whose corners are all 0-voxels.
inline void fill_background(CellLattice& lat, const BinaryGrid& g) {
  const int n = g.ndim();
  std::array<int, kMaxDim> unpadded{};
  for (int a = 0; a < n; ++a) unpadded[a] = 2 * g.dim(a) - 1;
  lat.init(n, unpadded);
  for_each_voxel(g.dims(), [&](const Coord& v, std::size_t flat) {
    if (g.get(flat)) return;
    std::array<int, kMaxDim> p{0, 0, 0, 0};
    for (int a = 0; a < n; ++a) p[a] = 2 * v[a] + 1;
    lat.present[lat.index(p)] = 1;
  });
  // A cell exists iff all of its facets do (equivalently all its corners).
  for (int k = 1; k <= n; ++k) {
    for (std::size_t idx = 0; idx < lat.size(); ++idx) {
      const std::uint8_t m = lat.oddmask[idx];
      if (std::popcount(m) != k) continue;
      const auto p = lat.coords(idx);
      bool inside = true;
      for (int a = 0; a < n; ++a) inside = inside && p[a] >= 1 && p[a] <= unpadded[a];
      if (!inside) continue;
      bool all = true;
      for (int a = 0; a < n && all; ++a)
        if (m & (1u << a)) all = lat.present[idx - lat.stride[a]] && lat.present[idx + lat.stride[a]];
      lat.present[idx] = all ? 1 : 0;
    }
  }
}

inline std::array<std::size_t, kMaxDim + 1> count_cells(const CellLattice& lat) {
  std::array<std::size_t, kMaxDim + 1> c{};
  for (std::size_t idx = 0; idx < lat.size(); ++idx)
    if (lat.present[idx]) ++c[static_cast<std::size_t>(lat.cell_dim(idx))];
  return c;
}

// Greedy elementary collapses: repeatedly remove a face with exactly one
// coface together with that coface. Mutates lat.present.
inline void collapse(CellLattice& lat) {
  auto& alive = lat.present;
  const int n = lat.ndim;
  std::vector<std::uint8_t> cofaces(alive.size(), 0);
  std::vector<std::uint32_t> stack;
  for (std::size_t idx = 0; idx < alive.size(); ++idx) {
    if (!alive[idx]) continue;
    const std::uint8_t m = lat.oddmask[idx];
    std::uint8_t count = 0;
    for (int a = 0; a < n; ++a) {
      if (m & (1u << a)) continue;
      count = static_cast<std::uint8_t>(count + alive[idx - lat.stride[a]] + alive[idx + lat.stride[a]]);
    }
    cofaces[idx] = count;
    if (count == 1) stack.push_back(static_cast<std::uint32_t>(idx));
  }

  auto release_facets = [&](std::size_t cell, std::size_t except) {
    const std::uint8_t m = lat.oddmask[cell];
    for (int a = 0; a < n; ++a) {
      if (!(m & (1u << a))) continue;
      for (std::size_t f : {cell - lat.stride[a], cell + lat.stride[a]}) {
        if (f == except) continue;
        --cofaces[f];
        if (alive[f] && cofaces[f] == 1) stack.push_back(static_cast<std::uint32_t>(f));
      }
    }
  };

  while (!stack.empty()) {
    const std::size_t face = stack.back();
    stack.pop_back();
    if (!alive[face] || cofaces[face] != 1) continue;
    std::size_t coface = 0;
    const std::uint8_t m = lat.oddmask[face];
    for (int a = 0; a < n && coface == 0; ++a) {
      if (m & (1u << a)) continue;
      if (alive[face - lat.stride[a]])
        coface = face - lat.stride[a];
      else if (alive[face + lat.stride[a]])
        coface = face + lat.stride[a];
    }
    alive[coface] = 0;
    alive[face] = 0;
    release_facets(coface, face);
    release_facets(face, static_cast<std::size_t>(-1));
  }
}

// Betti numbers of the (possibly collapsed) complex stored in `lat`.
inline std::array<std::int64_t, kMaxDim + 1> reduce_betti(const CellLattice& lat, std::size_t dense_threshold) {
  const int n = lat.ndim;
  std::array<std::vector<std::uint32_t>, kMaxDim + 1> cells;
  for (std::size_t idx = 0; idx < lat.size(); ++idx)
    if (lat.present[idx]) cells[static_cast<std::size_t>(lat.cell_dim(idx))].push_back(static_cast<std::uint32_t>(idx));

  std::size_t total = 0;
  for (const auto& c : cells) total += c.size();
  std::array<std::int64_t, kMaxDim + 1> betti{};
  if (total == 0) return betti;

  // Position of each residual cell within its dimension, looked up by lattice index.
  std::vector<std::uint32_t> pos(lat.size(), 0);
  for (const auto& c : cells)
    for (std::size_t i = 0; i < c.size(); ++i) pos[c[i]] = static_cast<std::uint32_t>(i);

  auto boundary_columns = [&](int k) {
    std::vector<std::vector<std::uint32_t>> cols(cells[static_cast<std::size_t>(k)].size());
    for (std::size_t j = 0; j < cols.size(); ++j) {
      const std::size_t idx = cells[static_cast<std::size_t>(k)][j];
      const std::uint8_t m = lat.oddmask[idx];
      for (int a = 0; a < n; ++a) {
        if (!(m & (1u << a))) continue;
        cols[j].push_back(pos[idx - lat.stride[a]]);
        cols[j].push_back(pos[idx + lat.stride[a]]);
      }
      std::sort(cols[j].begin(), cols[j].end());
    }
    return cols;
  };

  std::array<std::size_t, kMaxDim + 2> rank{};
  if (total <= dense_threshold) {
    for (int k = 1; k <= n; ++k) {
      Gf2Matrix m;
      m.rows = cells[static_cast<std::size_t>(k - 1)].size();
      m.columns = boundary_columns(k);
      rank[static_cast<std::size_t>(k)] = gf2_rank_dense(m);
    }
  } else {
    // Clearing: a pivot row of the reduced d_{k+1} is a k-cell whose column
    // in d_k reduces to zero.
    std::vector<std::uint8_t> cleared;
    for (int k = n; k >= 1; --k) {
      auto cols = boundary_columns(k);
      cleared.resize(cols.size(), 0);
      std::vector<std::uint32_t> pivots;
      rank[static_cast<std::size_t>(k)] =
          gf2_reduce_sparse(cols, cells[static_cast<std::size_t>(k - 1)].size(), &cleared, &pivots);
      cleared.assign(cells[static_cast<std::size_t>(k - 1)].size(), 0);
      for (auto p : pivots) cleared[p] = 1;
    }
  }
  for (int k = 0; k <= n; ++k) {
    const auto uk = static_cast<std::size_t>(k);
    betti[uk] = static_cast<std::int64_t>(cells[uk].size()) - static_cast<std::int64_t>(rank[uk]) -
                static_cast<std::int64_t>(rank[uk + 1]);
  }
  return betti;
}

inline BettiVector betti_of_lattice(CellLattice lat, bool reduced, const HomologyOptions& opts) {
  const auto counts = count_cells(lat);
  std::int64_t euler = 0;
  for (int k = 0; k <= lat.ndim; ++k)
    euler += (k % 2 ? -1 : 1) * static_cast<std::int64_t>(counts[static_cast<std::size_t>(k)]);
  if (opts.collapse) collapse(lat);
  const auto b = reduce_betti(lat, opts.dense_threshold);
  if (b[kMaxDim] != 0) throw std::logic_error("betti: nonzero top homology in a 4D image");
  BettiVector out;
  for (std::size_t k = 0; k < 4; ++k) out.betti[k] = b[k];
  out.euler = euler;
  out.reduced = reduced;
  if (reduced && out.betti[0] > 0) --out.betti[0];
  return out;
}

}  // namespace detail

/// One cell of a cubical complex: the unit cube spanning `axes` at `anchor`.
struct Cell {
  Coord anchor;
  std::uint8_t axes = 0;
  int dim() const { return std::popcount(axes); }
  friend bool operator==(const Cell&, const Cell&) = default;
};

class CubicalComplex {
 public:
  /// Union of closed unit cubes at the 1-voxels of `g`.
  static CubicalComplex foreground(const BinaryGrid& g) {
    CubicalComplex c;
    detail::fill_foreground(c.lat_, g);
    c.counts_ = detail::count_cells(c.lat_);
    return c;
  }

  /// Face-adjacency model of the 0-voxels of `g` (out-of-range voxels excluded).
  static CubicalComplex background(const BinaryGrid& g) {
    CubicalComplex c;
    detail::fill_background(c.lat_, g);
    c.counts_ = detail::count_cells(c.lat_);
    return c;
  }

  int ndim() const { return lat_.ndim; }
  const std::array<std::size_t, kMaxDim + 1>& cell_counts() const { return counts_; }
  std::size_t cell_count(int k) const { return counts_[static_cast<std::size_t>(k)]; }
  const detail::CellLattice& lattice() const { return lat_; }

  /// k-cells in lattice order; boundary_matrix rows and columns follow it.
  std::vector<Cell> cells(int k) const {
    std::vector<Cell> out;
    for (std::size_t idx = 0; idx < lat_.size(); ++idx) {
      if (!lat_.present[idx] || lat_.cell_dim(idx) != k) continue;
      const auto p = lat_.coords(idx);
      Cell cell{Coord::zeros(lat_.ndim), lat_.oddmask[idx]};
      for (int a = 0; a < lat_.ndim; ++a) cell.anchor[a] = (p[a] - 1) / 2;
      out.push_back(cell);
    }
    return out;
  }

  /// Boundary map from k-cells to (k-1)-cells.
  Gf2Matrix boundary_matrix(int k) const {
    if (k < 1 || k > lat_.ndim) throw std::invalid_argument("boundary_matrix: k out of range");
    std::vector<std::uint32_t> pos(lat_.size(), 0);
    std::uint32_t rows = 0;
    for (std::size_t idx = 0; idx < lat_.size(); ++idx)
      if (lat_.present[idx] && lat_.cell_dim(idx) == k - 1) pos[idx] = rows++;
    Gf2Matrix m;
    m.rows = rows;
    for (std::size_t idx = 0; idx < lat_.size(); ++idx) {
      if (!lat_.present[idx] || lat_.cell_dim(idx) != k) continue;
      std::vector<std::uint32_t> col;
      for (int a = 0; a < lat_.ndim; ++a) {
        if (!(lat_.oddmask[idx] & (1u << a))) continue;
        col.push_back(pos[idx - lat_.stride[a]]);
        col.push_back(pos[idx + lat_.stride[a]]);
      }
      std::sort(col.begin(), col.end());
      m.columns.push_back(std::move(col));
    }
    return m;
  }

 private:
  detail::CellLattice lat_;
  std::array<std::size_t, kMaxDim + 1> counts_{};
};

inline CubicalComplex build_cubical_complex(const BinaryGrid& g) { return CubicalComplex::foreground(g); }

inline std::int64_t euler_from_cells(const CubicalComplex& c) {
  std::int64_t chi = 0;
  for (int k = 0; k <= c.ndim(); ++k) chi += (k % 2 ? -1 : 1) * static_cast<std::int64_t>(c.cell_count(k));
  return chi;
}

inline BettiVector betti_of_complex(const CubicalComplex& c, bool reduced = false,
                                    const HomologyOptions& opts = {}) {
  return detail::betti_of_lattice(c.lattice(), reduced, opts);
}

/// Betti numbers and Euler characteristic of the foreground of `g`.
inline BettiVector betti_numbers(const BinaryGrid& g, bool reduced = false, const HomologyOptions& opts = {}) {
  detail::CellLattice lat;
  detail::fill_foreground(lat, g);
  return detail::betti_of_lattice(std::move(lat), reduced, opts);
}

/// Betti numbers of the in-range background under face adjacency.
inline BettiVector background_betti(const BinaryGrid& g, const HomologyOptions& opts = {}) {
  detail::CellLattice lat;
  detail::fill_background(lat, g);
  return detail::betti_of_lattice(std::move(lat), false, opts);
}

/// True iff setting voxel `c` to `new_value` leaves the homology of both the
/// foreground and the background of its (2r+1)^n neighbourhood unchanged.
inline bool is_local_flip_safe(const BinaryGrid& g, const Coord& c, bool new_value, int radius = 1) {
  if (g.at(c) == new_value) throw std::invalid_argument("is_local_flip_safe: voxel already has the requested value");
  BinaryGrid block = extract_neighborhood(g, c, radius);
  Coord mid = Coord::zeros(g.ndim());
  for (int a = 0; a < g.ndim(); ++a) mid[a] = radius;
  const std::size_t centre = block.flat_index(mid);

  const BettiVector fg_before = betti_numbers(block);
  const BettiVector bg_before = background_betti(block);
  block.set(centre, new_value);
  return betti_numbers(block) == fg_before && background_betti(block) == bg_before;
}

}  // namespace topovox
