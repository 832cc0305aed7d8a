#include <gtest/gtest.h>

#include <cmath>

#include "test_util.hpp"
#include "topovox/homology.hpp"

namespace topovox {
namespace {

using testing::random_grid;

BinaryGrid from_rows(const std::vector<std::string>& rows) {
  BinaryGrid g({static_cast<int>(rows.size()), static_cast<int>(rows[0].size())});
  for (std::size_t r = 0; r < rows.size(); ++r)
    for (std::size_t c = 0; c < rows[r].size(); ++c)
      if (rows[r][c] == '#') g.set(Coord{static_cast<int>(r), static_cast<int>(c)}, true);
  return g;
}

// Rank over GF(2) as log2 of the size of the column span, by enumerating
// every subset of columns.
std::size_t span_rank(const Gf2Matrix& m) {
  std::set<std::vector<std::uint8_t>> span;
  const std::size_t cols = m.cols();
  for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << cols); ++mask) {
    std::vector<std::uint8_t> v(m.rows, 0);
    for (std::size_t j = 0; j < cols; ++j)
      if (mask >> j & 1)
        for (auto r : m.columns[j]) v[r] ^= 1;
    span.insert(v);
  }
  return static_cast<std::size_t>(std::log2(static_cast<double>(span.size())) + 0.5);
}

TEST(CubicalComplex, CellCountsOfSmallComplexes) {
  auto one = new_grid({3, 3}, false);
  one.set(Coord{1, 1}, true);
  auto c = build_cubical_complex(one);
  EXPECT_EQ(c.cell_count(0), 4u);
  EXPECT_EQ(c.cell_count(1), 4u);
  EXPECT_EQ(c.cell_count(2), 1u);
  EXPECT_EQ(euler_from_cells(c), 1);

  auto two = new_grid({3, 3}, false);
  two.set(Coord{1, 0}, true);
  two.set(Coord{1, 1}, true);
  c = build_cubical_complex(two);
  EXPECT_EQ(c.cell_count(0), 6u);
  EXPECT_EQ(c.cell_count(1), 7u);
  EXPECT_EQ(c.cell_count(2), 2u);

  const auto c4 = build_cubical_complex(new_grid({1, 1, 1, 1}, true));
  const std::array<std::size_t, 5> expected{16, 32, 24, 8, 1};
  EXPECT_EQ(c4.cell_counts(), expected);
}

TEST(CubicalComplex, CountsMatchSetEnumeration) {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const auto g2 = random_grid({6, 7}, 0.5, seed);
    EXPECT_EQ(build_cubical_complex(g2).cell_counts(), testing::brute_force_cell_counts(g2));
    const auto g4 = random_grid({3, 3, 2, 3}, 0.5, seed);
    EXPECT_EQ(build_cubical_complex(g4).cell_counts(), testing::brute_force_cell_counts(g4));
  }
}

TEST(CubicalComplex, EachCellHasTwoKFacets) {
  const auto g = random_grid({4, 4, 4}, 0.5, 5);
  const auto c = build_cubical_complex(g);
  for (int k = 1; k <= 3; ++k) {
    const auto m = c.boundary_matrix(k);
    EXPECT_EQ(m.cols(), c.cell_count(k));
    EXPECT_EQ(m.rows, c.cell_count(k - 1));
    for (const auto& col : m.columns) {
      EXPECT_EQ(col.size(), static_cast<std::size_t>(2 * k));
      EXPECT_EQ(std::adjacent_find(col.begin(), col.end()), col.end());
    }
  }
}

TEST(CubicalComplex, BoundaryOfBoundaryVanishes) {
  for (std::uint64_t seed = 0; seed < 12; ++seed) {
    const auto g = seed % 2 ? random_grid({5, 5, 5}, 0.5, seed) : random_grid({3, 3, 3, 3}, 0.5, seed);
    const auto c = build_cubical_complex(g);
    for (int k = 2; k <= g.ndim(); ++k)
      EXPECT_TRUE(gf2_multiply(c.boundary_matrix(k - 1), c.boundary_matrix(k)).is_zero()) << "k=" << k;
  }
}

TEST(Gf2, RankBasics) {
  Gf2Matrix zero;
  zero.rows = 4;
  zero.columns.resize(3);
  EXPECT_EQ(gf2_rank(zero), 0u);
  EXPECT_EQ(gf2_rank(Gf2Matrix::identity(5)), 5u);
  EXPECT_EQ(gf2_rank_sparse(Gf2Matrix::identity(5)), 5u);
}

TEST(Gf2, RankOfSquareEdgeBoundary) {
  auto one = new_grid({1, 1}, true);
  const auto d1 = build_cubical_complex(one).boundary_matrix(1);
  ASSERT_EQ(d1.rows, 4u);
  ASSERT_EQ(d1.cols(), 4u);
  const auto oracle = span_rank(d1);
  EXPECT_EQ(oracle, 3u);
  EXPECT_EQ(gf2_rank_dense(d1), oracle);
  EXPECT_EQ(gf2_rank_sparse(d1), oracle);
}

TEST(Gf2, DenseAndSparseAgreeWithSpanOracle) {
  std::mt19937_64 rng(17);
  for (int t = 0; t < 200; ++t) {
    Gf2Matrix m;
    m.rows = 1 + rng() % 12;
    m.columns.resize(1 + rng() % 12);
    for (auto& col : m.columns) {
      for (std::uint32_t r = 0; r < m.rows; ++r)
        if (rng() % 3 == 0) col.push_back(r);
    }
    const auto oracle = span_rank(m);
    EXPECT_EQ(gf2_rank_dense(m), oracle);
    EXPECT_EQ(gf2_rank_sparse(m), oracle);
  }
}

TEST(Betti, EmptyGridIsAllZero) {
  EXPECT_EQ(betti_numbers(new_grid({4, 4, 4}, false)), make_betti(0));
}

TEST(Betti, Annulus) {
  const auto ring = from_rows({
      ".....",
      ".###.",
      ".#.#.",
      ".###.",
      ".....",
  });
  EXPECT_EQ(betti_numbers(ring), make_betti(1, 1));
  EXPECT_EQ(euler_from_cells(build_cubical_complex(ring)), 0);
}

TEST(Betti, FigureEight) {
  const auto eight = from_rows({
      "#####",
      "#.#.#",
      "#####",
  });
  EXPECT_EQ(betti_numbers(eight), make_betti(1, 2));
}

TEST(Betti, HollowCubeShell) {
  auto g = new_grid({5, 5, 5}, true);
  for (int x = 1; x < 4; ++x)
    for (int y = 1; y < 4; ++y)
      for (int z = 1; z < 4; ++z) g.set(Coord{x, y, z}, false);
  EXPECT_EQ(betti_numbers(g), make_betti(1, 0, 1));
}

TEST(Betti, TorusShell) {
  // Implicit torus surface thickened to just under one voxel.
  auto g = new_grid({16, 16, 16}, false);
  for_each_voxel(g.dims(), [&](const Coord& c, std::size_t flat) {
    const double x = c[0] - 7.5, y = c[1] - 7.5, z = c[2] - 7.5;
    const double ring = std::hypot(x, y) - 4.5;
    const double d = std::hypot(ring, z) - 2.5;
    if (std::abs(d) <= 0.87) g.set(flat, true);
  });
  const auto duality = testing::duality_betti(g);
  EXPECT_EQ(duality, (std::array<std::int64_t, 4>{1, 2, 1, 0}));
  EXPECT_EQ(testing::alternating(testing::brute_force_cell_counts(g)), 0);
  EXPECT_EQ(betti_numbers(g), make_betti(1, 2, 1));
}

TEST(Betti, ReducedMode) {
  auto g = new_grid({5, 5}, false);
  g.set(Coord{1, 1}, true);
  g.set(Coord{3, 3}, true);
  const auto r = betti_numbers(g, true);
  EXPECT_TRUE(r.reduced);
  EXPECT_EQ(r.betti[0], 1);
  EXPECT_EQ(r.euler, 2);
  EXPECT_EQ(betti_numbers(new_grid({3, 3}, false), true).betti[0], 0);
}

TEST(Betti, SolidFourCube) {
  EXPECT_EQ(betti_numbers(new_grid({6, 6, 6, 6}, true)), make_betti(1));
}

TEST(Betti, FourDimensionalSphereShell) {
  auto g = new_grid({5, 5, 5, 5}, true);
  g.set(Coord{2, 2, 2, 2}, false);
  EXPECT_EQ(betti_numbers(g), make_betti(1, 0, 0, 1));
}

TEST(Betti, EulerPoincareOnRandomGrids) {
  for (std::uint64_t seed = 0; seed < 40; ++seed) {
    const auto g3 = random_grid({8, 8, 8}, 0.3 + 0.01 * static_cast<double>(seed), seed);
    const auto b3 = betti_numbers(g3);
    EXPECT_EQ(b3.alternating_sum(), b3.euler);
    EXPECT_EQ(b3.euler, euler_from_cells(build_cubical_complex(g3)));
    const auto g4 = random_grid({5, 5, 5, 5}, 0.5, seed);
    const auto b4 = betti_numbers(g4);
    EXPECT_EQ(b4.alternating_sum(), b4.euler);
  }
}

TEST(Betti, MatchesDualityOracleIn2DAnd3D) {
  for (std::uint64_t seed = 0; seed < 40; ++seed) {
    const auto g2 = random_grid({12, 12}, 0.5, seed);
    const auto b2 = betti_numbers(g2);
    const auto o2 = testing::duality_betti(g2);
    EXPECT_EQ(b2.betti, o2) << "seed " << seed;
    const auto g3 = random_grid({7, 7, 7}, 0.45, seed);
    EXPECT_EQ(betti_numbers(g3).betti, testing::duality_betti(g3)) << "seed " << seed;
  }
}

TEST(Betti, CollapseAndRankRoutesAgree) {
  HomologyOptions raw;
  raw.collapse = false;
  HomologyOptions sparse;
  sparse.dense_threshold = 0;
  HomologyOptions dense;
  dense.collapse = false;
  dense.dense_threshold = std::size_t{1} << 30;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto g = seed % 2 ? random_grid({6, 6, 6}, 0.5, seed) : random_grid({4, 4, 3, 4}, 0.55, seed);
    const auto ref = betti_numbers(g);
    EXPECT_EQ(betti_numbers(g, false, raw), ref);
    EXPECT_EQ(betti_numbers(g, false, sparse), ref);
    EXPECT_EQ(betti_numbers(g, false, dense), ref);
  }
}

TEST(Betti, DisjointUnionIsAdditive) {
  for (std::uint64_t seed = 0; seed < 15; ++seed) {
    const auto a = random_grid({6, 6, 6}, 0.5, seed);
    const auto b = random_grid({6, 6, 6}, 0.5, seed + 100);
    auto u = new_grid({14, 6, 6}, false);
    for_each_voxel(a.dims(), [&](const Coord& c, std::size_t flat) {
      if (a.get(flat)) u.set(c, true);
      if (b.get(flat)) u.set(c + Coord{8, 0, 0}, true);
    });
    const auto ba = betti_numbers(a), bb = betti_numbers(b), bu = betti_numbers(u);
    for (std::size_t k = 0; k < 4; ++k) EXPECT_EQ(bu.betti[k], ba.betti[k] + bb.betti[k]);
  }
}

TEST(Betti, InvariantUnderAxisPermutationAndReflection) {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const auto g = random_grid({4, 5, 6}, 0.5, seed);
    const auto ref = betti_numbers(g);
    EXPECT_EQ(betti_numbers(testing::transform_grid(g, {1, 2, 0}, {false, true, false})), ref);
    EXPECT_EQ(betti_numbers(testing::transform_grid(g, {0, 1, 2}, {true, true, true})), ref);
    const auto g4 = random_grid({3, 4, 3, 4}, 0.5, seed);
    EXPECT_EQ(betti_numbers(testing::transform_grid(g4, {3, 1, 0, 2}, {true, false, false, true})),
              betti_numbers(g4));
  }
}

TEST(Betti, BackgroundModelIsFaceConnected) {
  // Diagonal background voxels separated by foreground are two components.
  const auto g = from_rows({
      "#.",
      ".#",
  });
  EXPECT_EQ(background_betti(g).betti[0], 2);
  EXPECT_EQ(betti_numbers(g).betti[0], 1);
}

TEST(LocalFlip, DeletingIsolatedVoxelIsUnsafe) {
  auto g = new_grid({5, 5, 5}, false);
  g.set(Coord{2, 2, 2}, true);
  EXPECT_FALSE(is_local_flip_safe(g, {2, 2, 2}, false));
}

TEST(LocalFlip, DeletingMiddleOfSegmentIsUnsafe) {
  const auto g = from_rows({
      ".....",
      ".###.",
      ".....",
  });
  EXPECT_FALSE(is_local_flip_safe(g, {1, 2}, false));
  EXPECT_TRUE(is_local_flip_safe(g, {1, 1}, false));
}

TEST(LocalFlip, DeletingCornerOfSquareBlockIsSafe) {
  const auto g = from_rows({
      "....",
      ".##.",
      ".##.",
      "....",
  });
  // Oracle: both neighbourhood states are one contractible foreground piece
  // with a single face-connected background piece around it.
  auto block = extract_neighborhood(g, {1, 1}, 1);
  for (int pass = 0; pass < 2; ++pass) {
    EXPECT_EQ(testing::flood_count(block, true, Adjacency::full), 1u);
    EXPECT_EQ(testing::flood_count(block, false, Adjacency::face), 1u);
    EXPECT_EQ(testing::flood_count(testing::pad_grid(block, 1), false, Adjacency::face), 1u);
    block.set(Coord{1, 1}, false);
  }
  EXPECT_TRUE(is_local_flip_safe(g, {1, 1}, false));
}

TEST(LocalFlip, FillingHoleIsUnsafe) {
  const auto ring = from_rows({
      "###",
      "#.#",
      "###",
  });
  EXPECT_FALSE(is_local_flip_safe(ring, {1, 1}, true));
}

TEST(LocalFlip, ThickeningADiagonalIsSafe) {
  const auto g = from_rows({
      "#..",
      ".#.",
      "...",
  });
  EXPECT_TRUE(is_local_flip_safe(g, {0, 1}, true));
  EXPECT_THROW(is_local_flip_safe(g, {0, 0}, true), std::invalid_argument);
}

}  // namespace
}  // namespace topovox
