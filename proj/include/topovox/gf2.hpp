// Rank of sparse matrices over GF(2).

#pragma once

#include <algorithm>
#include <bit>
#include <cstddef>
#include <cstdint>
#include <iterator>
#include <stdexcept>
#include <vector>

namespace topovox {

/// Column-major sparse matrix over GF(2). Each column holds the sorted row
/// indices of its nonzero entries.
struct Gf2Matrix {
  std::size_t rows = 0;
  std::vector<std::vector<std::uint32_t>> columns;

  std::size_t cols() const { return columns.size(); }

  static Gf2Matrix identity(std::size_t n) {
    Gf2Matrix m;
    m.rows = n;
    m.columns.resize(n);
    for (std::size_t i = 0; i < n; ++i) m.columns[i] = {static_cast<std::uint32_t>(i)};
    return m;
  }

  bool is_zero() const {
    return std::all_of(columns.begin(), columns.end(), [](const auto& c) { return c.empty(); });
  }
};

namespace detail {

inline void xor_into(std::vector<std::uint32_t>& acc, const std::vector<std::uint32_t>& other,
                     std::vector<std::uint32_t>& scratch) {
  scratch.clear();
  std::set_symmetric_difference(acc.begin(), acc.end(), other.begin(), other.end(),
                                std::back_inserter(scratch));
  acc.swap(scratch);
}

inline constexpr std::uint32_t kNoPivot = 0xffffffffu;

}  // namespace detail

/// Standard lowest-one column reduction. `skip[j]` marks columns known to
/// reduce to zero. Returns the rank; pivot rows are appended to `pivots_out`.
inline std::size_t gf2_reduce_sparse(std::vector<std::vector<std::uint32_t>>& columns, std::size_t rows,
                                     const std::vector<std::uint8_t>* skip = nullptr,
                                     std::vector<std::uint32_t>* pivots_out = nullptr) {
  std::vector<std::uint32_t> pivot_owner(rows, detail::kNoPivot);
  std::vector<std::uint32_t> scratch;
  std::size_t rank = 0;
  for (std::size_t j = 0; j < columns.size(); ++j) {
    if (skip && (*skip)[j]) {
      columns[j].clear();
      continue;
    }
    auto& col = columns[j];
    while (!col.empty()) {
      const std::uint32_t low = col.back();
      const std::uint32_t owner = pivot_owner[low];
      if (owner == detail::kNoPivot) {
        pivot_owner[low] = static_cast<std::uint32_t>(j);
        ++rank;
        if (pivots_out) pivots_out->push_back(low);
        break;
      }
      detail::xor_into(col, columns[owner], scratch);
    }
  }
  return rank;
}

inline std::size_t gf2_rank_sparse(Gf2Matrix m) { return gf2_reduce_sparse(m.columns, m.rows); }

/// Gaussian elimination on packed bit columns.
inline std::size_t gf2_rank_dense(const Gf2Matrix& m) {
  const std::size_t words = (m.rows + 63) / 64;
  if (words == 0) return 0;
  std::vector<std::uint64_t> bits(words * m.cols(), 0);
  for (std::size_t j = 0; j < m.cols(); ++j)
    for (auto r : m.columns[j]) {
      if (r >= m.rows) throw std::out_of_range("gf2_rank_dense: row index out of range");
      bits[j * words + r / 64] ^= std::uint64_t{1} << (r % 64);
    }

  std::vector<std::uint32_t> pivot_owner(m.rows, detail::kNoPivot);
  std::size_t rank = 0;
  for (std::size_t j = 0; j < m.cols(); ++j) {
    std::uint64_t* col = &bits[j * words];
    for (;;) {
      std::size_t w = words;
      while (w > 0 && col[w - 1] == 0) --w;
      if (w == 0) break;
      const std::size_t low = (w - 1) * 64 + (63 - static_cast<std::size_t>(std::countl_zero(col[w - 1])));
      const std::uint32_t owner = pivot_owner[low];
      if (owner == detail::kNoPivot) {
        pivot_owner[low] = static_cast<std::uint32_t>(j);
        ++rank;
        break;
      }
      const std::uint64_t* other = &bits[owner * words];
      for (std::size_t k = 0; k < w; ++k) col[k] ^= other[k];
    }
  }
  return rank;
}

inline constexpr std::size_t kDefaultDenseThreshold = 4096;

/// Dense elimination for small matrices, sparse column reduction otherwise.
inline std::size_t gf2_rank(const Gf2Matrix& m, std::size_t dense_threshold = kDefaultDenseThreshold) {
  if (m.rows + m.cols() <= dense_threshold) return gf2_rank_dense(m);
  return gf2_rank_sparse(m);
}

/// Product a*b over GF(2).
inline Gf2Matrix gf2_multiply(const Gf2Matrix& a, const Gf2Matrix& b) {
  if (b.rows != a.cols()) throw std::invalid_argument("gf2_multiply: shape mismatch");
  Gf2Matrix out;
  out.rows = a.rows;
  out.columns.resize(b.cols());
  std::vector<std::uint32_t> scratch;
  for (std::size_t j = 0; j < b.cols(); ++j)
    for (auto k : b.columns[j]) detail::xor_into(out.columns[j], a.columns[k], scratch);
  return out;
}

}  // namespace topovox
