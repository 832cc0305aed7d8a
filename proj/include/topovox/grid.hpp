// n-dimensional bit-packed binary voxel grids (n = 2, 3, 4).
//
// Storage is row-major with the last axis fastest. Reads outside the grid
// return 0, so every neighbourhood query is total.

#pragma once

#include <algorithm>
#include <array>
#include <bit>
#include <compare>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <initializer_list>
#include <numeric>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace topovox {

inline constexpr int kMaxDim = 4;

class dimension_error : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class index_error : public std::out_of_range {
 public:
  using std::out_of_range::out_of_range;
};

enum class Adjacency {
  face,  // 2n neighbours
  full,  // 3^n - 1 neighbours
};

/// Integer voxel coordinate with 2..4 components.
class Coord {
 public:
  Coord() = default;
  Coord(std::initializer_list<int> values) {
    if (values.size() > kMaxDim) throw dimension_error("Coord: more than 4 components");
    std::copy(values.begin(), values.end(), v_.begin());
    n_ = static_cast<std::uint8_t>(values.size());
  }
  explicit Coord(std::span<const int> values) {
    if (values.size() > kMaxDim) throw dimension_error("Coord: more than 4 components");
    std::copy(values.begin(), values.end(), v_.begin());
    n_ = static_cast<std::uint8_t>(values.size());
  }
  static Coord zeros(int n) {
    Coord c;
    c.n_ = static_cast<std::uint8_t>(n);
    return c;
  }

  std::size_t size() const { return n_; }
  int& operator[](std::size_t i) { return v_[i]; }
  int operator[](std::size_t i) const { return v_[i]; }
  const int* begin() const { return v_.data(); }
  const int* end() const { return v_.data() + n_; }
  int* begin() { return v_.data(); }
  int* end() { return v_.data() + n_; }

  Coord operator+(const Coord& o) const {
    Coord r = *this;
    for (std::size_t i = 0; i < n_; ++i) r.v_[i] += o.v_[i];
    return r;
  }
  Coord operator-(const Coord& o) const {
    Coord r = *this;
    for (std::size_t i = 0; i < n_; ++i) r.v_[i] -= o.v_[i];
    return r;
  }

  friend bool operator==(const Coord& a, const Coord& b) {
    return a.n_ == b.n_ && std::equal(a.begin(), a.end(), b.begin());
  }
  // Lexicographic, which is also storage order for equal sizes.
  friend std::strong_ordering operator<=>(const Coord& a, const Coord& b) {
    if (a.n_ != b.n_) return a.n_ <=> b.n_;
    for (std::size_t i = 0; i < a.n_; ++i)
      if (a.v_[i] != b.v_[i]) return a.v_[i] <=> b.v_[i];
    return std::strong_ordering::equal;
  }

  std::string to_string() const {
    std::string s = "(";
    for (std::size_t i = 0; i < n_; ++i) {
      if (i) s += ",";
      s += std::to_string(v_[i]);
    }
    return s + ")";
  }

 private:
  std::array<int, kMaxDim> v_{};
  std::uint8_t n_ = 0;
};

class BinaryGrid {
 public:
  BinaryGrid() = default;

  explicit BinaryGrid(std::vector<int> dims, bool fill = false) : dims_(std::move(dims)) {
    if (dims_.size() < 2 || dims_.size() > kMaxDim)
      throw dimension_error("BinaryGrid: unsupported dimension count " +
                            std::to_string(dims_.size()) + " (expected 2, 3 or 4)");
    for (int d : dims_)
      if (d < 1) throw dimension_error("BinaryGrid: axis length must be >= 1");
    strides_.assign(dims_.size(), 1);
    for (int a = static_cast<int>(dims_.size()) - 2; a >= 0; --a)
      strides_[a] = strides_[a + 1] * static_cast<std::size_t>(dims_[a + 1]);
    size_ = strides_[0] * static_cast<std::size_t>(dims_[0]);
    words_.assign((size_ + 63) / 64, fill ? ~std::uint64_t{0} : 0);
    trim_tail();
  }

  int ndim() const { return static_cast<int>(dims_.size()); }
  const std::vector<int>& dims() const { return dims_; }
  int dim(int axis) const { return dims_[axis]; }
  const std::vector<std::size_t>& strides() const { return strides_; }
  std::size_t size() const { return size_; }
  bool empty() const { return size_ == 0; }

  bool get(std::size_t flat) const { return (words_[flat >> 6] >> (flat & 63)) & 1u; }
  void set(std::size_t flat, bool v) {
    const std::uint64_t bit = std::uint64_t{1} << (flat & 63);
    if (v)
      words_[flat >> 6] |= bit;
    else
      words_[flat >> 6] &= ~bit;
  }
  void flip(std::size_t flat) { words_[flat >> 6] ^= std::uint64_t{1} << (flat & 63); }

  bool in_range(const Coord& c) const {
    if (c.size() != dims_.size()) return false;
    for (std::size_t a = 0; a < dims_.size(); ++a)
      if (c[a] < 0 || c[a] >= dims_[a]) return false;
    return true;
  }

  std::size_t flat_index(const Coord& c) const {
    std::size_t f = 0;
    for (std::size_t a = 0; a < dims_.size(); ++a) f += static_cast<std::size_t>(c[a]) * strides_[a];
    return f;
  }

  Coord coord_of(std::size_t flat) const {
    Coord c = Coord::zeros(ndim());
    for (std::size_t a = 0; a < dims_.size(); ++a) {
      c[a] = static_cast<int>(flat / strides_[a]);
      flat %= strides_[a];
    }
    return c;
  }

  /// Out-of-range reads are background.
  bool at(const Coord& c) const { return in_range(c) && get(flat_index(c)); }

  void set(const Coord& c, bool v) {
    if (!in_range(c)) throw index_error("BinaryGrid::set: coordinate " + c.to_string() + " out of range");
    set(flat_index(c), v);
  }

  std::size_t count_ones() const {
    std::size_t n = 0;
    for (auto w : words_) n += static_cast<std::size_t>(std::popcount(w));
    return n;
  }

  BinaryGrid complement() const {
    BinaryGrid r = *this;
    for (auto& w : r.words_) w = ~w;
    r.trim_tail();
    return r;
  }

  std::span<const std::uint64_t> words() const { return words_; }
  std::span<std::uint64_t> words() { return words_; }

  friend bool operator==(const BinaryGrid& a, const BinaryGrid& b) {
    return a.dims_ == b.dims_ && a.words_ == b.words_;
  }

  BinaryGrid& operator|=(const BinaryGrid& o) {
    check_same_shape(o);
    for (std::size_t i = 0; i < words_.size(); ++i) words_[i] |= o.words_[i];
    return *this;
  }
  BinaryGrid& operator&=(const BinaryGrid& o) {
    check_same_shape(o);
    for (std::size_t i = 0; i < words_.size(); ++i) words_[i] &= o.words_[i];
    return *this;
  }

 private:
  void trim_tail() {
    if (size_ % 64 != 0 && !words_.empty()) words_.back() &= (std::uint64_t{1} << (size_ % 64)) - 1;
  }
  void check_same_shape(const BinaryGrid& o) const {
    if (o.dims_ != dims_) throw dimension_error("BinaryGrid: shape mismatch");
  }

  std::vector<int> dims_;
  std::vector<std::size_t> strides_;
  std::size_t size_ = 0;
  std::vector<std::uint64_t> words_;
};

inline BinaryGrid new_grid(std::vector<int> dims, bool fill) { return BinaryGrid(std::move(dims), fill); }

inline std::size_t count_ones(const BinaryGrid& g) { return g.count_ones(); }

/// Offsets of the neighbours of the origin under `adj`, in lexicographic order.
inline std::vector<Coord> neighbor_offsets(int ndim, Adjacency adj) {
  std::vector<Coord> out;
  if (adj == Adjacency::face) {
    for (int a = 0; a < ndim; ++a) {
      for (int s : {-1, 1}) {
        Coord c = Coord::zeros(ndim);
        c[a] = s;
        out.push_back(c);
      }
    }
    std::sort(out.begin(), out.end());
    return out;
  }
  int total = 1;
  for (int a = 0; a < ndim; ++a) total *= 3;
  for (int k = 0; k < total; ++k) {
    Coord c = Coord::zeros(ndim);
    int r = k;
    for (int a = ndim - 1; a >= 0; --a) {
      c[a] = r % 3 - 1;
      r /= 3;
    }
    if (std::any_of(c.begin(), c.end(), [](int v) { return v != 0; })) out.push_back(c);
  }
  return out;
}

/// Calls fn(coord, flat) for every voxel in storage order.
template <typename Fn>
void for_each_voxel(const std::vector<int>& dims, Fn&& fn) {
  const int n = static_cast<int>(dims.size());
  Coord c = Coord::zeros(n);
  std::size_t total = 1;
  for (int d : dims) total *= static_cast<std::size_t>(d);
  for (std::size_t flat = 0; flat < total; ++flat) {
    fn(static_cast<const Coord&>(c), flat);
    for (int a = n - 1; a >= 0; --a) {
      if (++c[a] < dims[a]) break;
      c[a] = 0;
    }
  }
}

/// Foreground voxels with at least one background neighbour under `adj`.
inline std::vector<Coord> boundary_voxels(const BinaryGrid& g, Adjacency adj = Adjacency::face) {
  std::vector<Coord> out;
  const auto offsets = neighbor_offsets(g.ndim(), adj);
  for_each_voxel(g.dims(), [&](const Coord& c, std::size_t flat) {
    if (!g.get(flat)) return;
    for (const auto& o : offsets) {
      if (!g.at(c + o)) {
        out.push_back(c);
        return;
      }
    }
  });
  return out;
}

inline bool is_boundary_voxel(const BinaryGrid& g, const Coord& c, Adjacency adj = Adjacency::face) {
  if (!g.at(c)) return false;
  for (const auto& o : neighbor_offsets(g.ndim(), adj))
    if (!g.at(c + o)) return true;
  return false;
}

/// The (2r+1)^n block centred on `center`, zero-padded where it leaves the grid.
inline BinaryGrid extract_neighborhood(const BinaryGrid& g, const Coord& center, int radius) {
  if (!g.in_range(center))
    throw index_error("extract_neighborhood: center " + center.to_string() + " out of range");
  if (radius < 1) throw std::invalid_argument("extract_neighborhood: radius must be positive");
  const int n = g.ndim();
  BinaryGrid block(std::vector<int>(static_cast<std::size_t>(n), 2 * radius + 1));
  Coord shift = Coord::zeros(n);
  for (int a = 0; a < n; ++a) shift[a] = center[a] - radius;
  for_each_voxel(block.dims(), [&](const Coord& c, std::size_t flat) {
    if (g.at(c + shift)) block.set(flat, true);
  });
  return block;
}

/// Union-find with path halving and union by size.
class DisjointSets {
 public:
  explicit DisjointSets(std::size_t n) : parent_(n), size_(n, 1) {
    std::iota(parent_.begin(), parent_.end(), std::size_t{0});
  }
  std::size_t find(std::size_t x) {
    while (parent_[x] != x) {
      parent_[x] = parent_[parent_[x]];
      x = parent_[x];
    }
    return x;
  }
  bool unite(std::size_t a, std::size_t b) {
    a = find(a);
    b = find(b);
    if (a == b) return false;
    if (size_[a] < size_[b]) std::swap(a, b);
    parent_[b] = a;
    size_[a] += size_[b];
    return true;
  }

 private:
  std::vector<std::size_t> parent_;
  std::vector<std::size_t> size_;
};

struct ComponentLabeling {
  std::size_t count = 0;
  // Component id per voxel in storage order; -1 for background.
  std::vector<std::int32_t> labels;
};

/// Foreground components; ids are assigned in storage order of first voxel.
inline ComponentLabeling connected_components(const BinaryGrid& g, Adjacency adj = Adjacency::full) {
  // Only "backward" offsets are needed for a raster scan.
  std::vector<Coord> backward;
  for (const auto& o : neighbor_offsets(g.ndim(), adj))
    if (o < Coord::zeros(g.ndim())) backward.push_back(o);

  DisjointSets sets(g.size());
  for_each_voxel(g.dims(), [&](const Coord& c, std::size_t flat) {
    if (!g.get(flat)) return;
    for (const auto& o : backward) {
      const Coord nb = c + o;
      if (g.at(nb)) sets.unite(flat, g.flat_index(nb));
    }
  });

  ComponentLabeling out;
  out.labels.assign(g.size(), -1);
  std::vector<std::int32_t> root_label(g.size(), -1);
  for (std::size_t flat = 0; flat < g.size(); ++flat) {
    if (!g.get(flat)) continue;
    const std::size_t r = sets.find(flat);
    if (root_label[r] < 0) root_label[r] = static_cast<std::int32_t>(out.count++);
    out.labels[flat] = root_label[r];
  }
  return out;
}

}  // namespace topovox

template <>
struct std::hash<topovox::Coord> {
  std::size_t operator()(const topovox::Coord& c) const noexcept {
    std::size_t h = c.size();
    for (int v : c) h = h * 1000003u ^ static_cast<std::size_t>(static_cast<unsigned>(v));
    return h;
  }
};
