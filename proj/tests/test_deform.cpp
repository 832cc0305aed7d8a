#include <gtest/gtest.h>

#include "test_util.hpp"
#include "topovox/deform.hpp"

namespace topovox {
namespace {

using testing::random_grid;

BinaryGrid disc_2d(int side, double cx, double cy, double r) {
  BinaryGrid g({side, side});
  for_each_voxel(g.dims(), [&](const Coord& c, std::size_t f) {
    if ((c[0] - cx) * (c[0] - cx) + (c[1] - cy) * (c[1] - cy) <= r * r) g.set(f, true);
  });
  return g;
}

// Two touching rings: a thick figure eight with two holes.
BinaryGrid figure_eight() {
  BinaryGrid g({64, 64});
  for_each_voxel(g.dims(), [&](const Coord& c, std::size_t f) {
    for (double cy : {20.0, 43.0}) {
      const double d = std::hypot(c[0] - 31.5, c[1] - cy);
      if (d <= 12 && d >= 6) g.set(f, true);
    }
  });
  return g;
}

NoiseField gradient_noise(const std::vector<int>& dims, int axis) {
  NoiseField f{dims, 1, 0, {}};
  f.values.resize(BinaryGrid(dims).size());
  for_each_voxel(dims, [&](const Coord& c, std::size_t flat) {
    f.values[flat] = -1 + 2.0 * c[axis] / (dims[static_cast<std::size_t>(axis)] - 1);
  });
  return f;
}

TEST(Deform, DiscKeepsVolumeAndTopology) {
  const auto g = disc_2d(64, 31.5, 31.5, 16);
  DeformConfig cfg;
  cfg.iterations = 600;
  cfg.noise_scale = 6;
  cfg.seed = 5;
  const auto [out, rep] = deform_volume_preserving(g, cfg);
  EXPECT_EQ(rep.accepted_flips, 600u);
  EXPECT_EQ(out.count_ones(), g.count_ones());
  EXPECT_EQ(rep.volume_after, rep.volume_before);
  EXPECT_EQ(betti_numbers(out), make_betti(1, 0));
  EXPECT_EQ(rep.betti_after, rep.betti_before);
  EXPECT_GE(rep.global_checks, 6u);
  EXPECT_GT(displaced_boundary_fraction(g, out), 0.3);
}

TEST(Deform, FigureEightKeepsBothHoles) {
  const auto g = figure_eight();
  ASSERT_EQ(betti_numbers(g), make_betti(1, 2));
  DeformConfig cfg;
  cfg.iterations = 600;
  cfg.noise_scale = 6;
  cfg.seed = 11;
  const auto [out, rep] = deform_volume_preserving(g, cfg);
  EXPECT_EQ(betti_numbers(out), make_betti(1, 2));
  EXPECT_EQ(out.count_ones(), g.count_ones());
  EXPECT_NE(out, g);
}

TEST(Deform, ZeroIterationsIsIdentity) {
  const auto g = disc_2d(32, 15.5, 15.5, 8);
  DeformConfig cfg;
  cfg.iterations = 0;
  const auto [out, rep] = deform_volume_preserving(g, cfg);
  EXPECT_EQ(out, g);
  EXPECT_EQ(rep.accepted_flips, 0u);
  EXPECT_EQ(rep.rejected_removals + rep.rejected_placements, 0u);
}

TEST(Deform, ConfigValidation) {
  DeformConfig cfg;
  cfg.safety_radius = 0;
  EXPECT_THROW(cfg.validate(), std::invalid_argument);
  cfg = {};
  cfg.global_check_every = 0;
  EXPECT_THROW(deform_volume_preserving(BinaryGrid({4, 4}), cfg), std::invalid_argument);
}

TEST(SelectMove, IsolatedVoxelCannotMove) {
  BinaryGrid g({9, 9});
  g.set(Coord{4, 4}, true);
  const auto noise = noise_field(g.dims(), 3.3, 1);
  EXPECT_FALSE(select_move(g, noise, DeformConfig{}).has_value());
}

TEST(SelectMove, FullGridHasNoTarget) {
  BinaryGrid g({9, 9}, true);
  EXPECT_FALSE(select_move(g, noise_field(g.dims(), 3.3, 1), DeformConfig{}).has_value());
}

TEST(SelectMove, BarUnderMonotoneNoise) {
  BinaryGrid g({11, 16});
  for (int c = 3; c <= 12; ++c) g.set(Coord{5, c}, true);
  const auto noise = gradient_noise(g.dims(), 1);
  const auto m = select_move(g, noise, DeformConfig{});
  ASSERT_TRUE(m.has_value());
  // Lowest noise sits at the left end; its best empty neighbours are the two
  // diagonal ones in column 4 (equal noise, first in storage order wins).
  EXPECT_EQ(m->from, (Coord{5, 3}));
  EXPECT_EQ(m->to, (Coord{4, 4}));

  // Enumeration: no other admissible pair has a lower-noise source, and no
  // admissible target of that source has higher noise.
  for_each_voxel(g.dims(), [&](const Coord& c, std::size_t f) {
    if (!g.get(f) || noise.values[f] >= noise.values[g.flat_index(m->from)]) return;
    ADD_FAILURE() << "lower-noise source " << c.to_string();
  });
}

TEST(SelectMove, DeformFollowsRepeatedSelection) {
  const auto g = disc_2d(32, 15.5, 15.5, 8);
  DeformConfig cfg;
  cfg.iterations = 40;
  cfg.noise_scale = 5;
  cfg.seed = 2;
  const auto noise = noise_field(g.dims(), cfg.noise_scale, cfg.seed);
  BinaryGrid step = g;
  for (int i = 0; i < cfg.iterations; ++i) {
    const auto m = select_move(step, noise, cfg);
    ASSERT_TRUE(m.has_value());
    step.set(m->from, false);
    step.set(m->to, true);
  }
  EXPECT_EQ(deform_volume_preserving(g, cfg).first, step);
}

TEST(Deform, ExhaustiveTargetsAlsoSafe) {
  const auto g = figure_eight();
  DeformConfig cfg;
  cfg.iterations = 300;
  cfg.exhaustive_targets = true;
  cfg.max_move_distance = 2;
  cfg.safety_radius = 2;
  const auto [out, rep] = deform_volume_preserving(g, cfg);
  EXPECT_EQ(betti_numbers(out), make_betti(1, 2));
  EXPECT_EQ(out.count_ones(), g.count_ones());
}

TEST(Deform, AcceptHookVetoes) {
  const auto g = disc_2d(32, 15.5, 15.5, 8);
  DeformConfig cfg;
  cfg.iterations = 50;
  cfg.accept = [](const BinaryGrid&, const Move& m) { return m.to[0] < 16; };
  const auto [out, rep] = deform_volume_preserving(g, cfg);
  for_each_voxel(g.dims(), [&](const Coord& c, std::size_t f) {
    if (out.get(f) && !g.get(f)) {
      EXPECT_LT(c[0], 16);
    }
  });
}

TEST(Deform, Deterministic) {
  const auto g = random_grid({24, 24, 12}, 0.45, 3);
  DeformConfig cfg;
  cfg.iterations = 80;
  cfg.seed = 99;
  const auto a = deform_volume_preserving(g, cfg);
  const auto b = deform_volume_preserving(g, cfg);
  EXPECT_EQ(a.first, b.first);
  EXPECT_TRUE(a.second.same_outcome(b.second));
}

TEST(Deform, CentroidFollowsGradient) {
  const auto g = disc_2d(48, 23.5, 16, 8);
  const auto noise = gradient_noise(g.dims(), 1);
  DeformConfig cfg;
  cfg.iterations = 200;
  const auto [out, rep] = deform_volume_preserving(g, cfg, &noise);
  auto mean_col = [](const BinaryGrid& x) {
    double s = 0;
    for_each_voxel(x.dims(), [&](const Coord& c, std::size_t f) {
      if (x.get(f)) s += c[1];
    });
    return s / static_cast<double>(x.count_ones());
  };
  EXPECT_GT(mean_col(out), mean_col(g) + 1.0);
  EXPECT_EQ(betti_numbers(out), make_betti(1));
}

TEST(DeformCorpus, RandomGrids) {
  DeformConfig cfg;
  for (std::uint64_t s = 0; s < 100; ++s) {
    const auto g = random_grid({32, 32}, 0.55, s);
    cfg.iterations = 150;
    cfg.seed = s;
    cfg.noise_scale = 5;
    const auto [out, rep] = deform_volume_preserving(g, cfg);
    EXPECT_EQ(out.count_ones(), g.count_ones());
    EXPECT_EQ(betti_numbers(out), betti_numbers(g)) << "2D seed " << s;
  }
  for (std::uint64_t s = 0; s < 20; ++s) {
    const auto g = random_grid({16, 16, 16}, 0.6, s + 500);
    cfg.iterations = 100;
    cfg.seed = s;
    const auto [out, rep] = deform_volume_preserving(g, cfg);
    EXPECT_EQ(out.count_ones(), g.count_ones());
    EXPECT_EQ(betti_numbers(out), betti_numbers(g)) << "3D seed " << s;
  }
  for (std::uint64_t s = 0; s < 5; ++s) {
    const auto g = random_grid({12, 12, 12, 12}, 0.7, s + 900);
    cfg.iterations = 40;
    cfg.seed = s;
    cfg.global_check_every = 10;
    try {
      const auto [out, rep] = deform_volume_preserving(g, cfg);
      EXPECT_EQ(out.count_ones(), g.count_ones());
      EXPECT_EQ(betti_numbers(out), betti_numbers(g)) << "4D seed " << s;
    } catch (const topology_drift_error& e) {
      ADD_FAILURE() << "4D seed " << s << ": " << e.what();
    }
  }
}

}  // namespace
}  // namespace topovox
