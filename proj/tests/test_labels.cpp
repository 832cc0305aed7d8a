#include <gtest/gtest.h>

#include <algorithm>

#include "topovox/labels.hpp"

namespace topovox {
namespace {

std::vector<HandleCounts> valid_counts(int max_ghi, int max_j) {
  std::vector<HandleCounts> out;
  for (int g = 0; g <= max_ghi; ++g)
    for (int h = 0; h <= max_ghi; ++h)
      for (int i = 0; i <= max_ghi; ++i) {
        if (g + h + i == 0) continue;
        if (i == 0) {
          out.push_back({g, h, 0, 0});
          continue;
        }
        for (int j = 1; j <= max_j; ++j) out.push_back({g, h, i, j});
      }
  return out;
}

TEST(Labels, ClosedSumExamples) {
  EXPECT_EQ(betti_closed_sum({1, 0, 0, 0}), make_betti(1, 1, 1, 1));
  EXPECT_EQ(betti_closed_sum({0, 0, 1, 1}), make_betti(1, 3, 3, 1));
}

TEST(Labels, BoundarySumExamples) {
  EXPECT_EQ(betti_boundary_sum({1, 0, 0, 0}), make_betti(1, 1, 0, 0));
  EXPECT_EQ(betti_boundary_sum({0, 1, 0, 0}), make_betti(1, 0, 1, 0));
  EXPECT_EQ(betti_boundary_sum({0, 1, 0, 0}).euler, 2);
  EXPECT_EQ(betti_boundary_sum({1, 1, 1, 1}), make_betti(1, 3, 2, 0));
  EXPECT_EQ(betti_boundary_sum({1, 1, 1, 1}).euler, 0);
  EXPECT_EQ(betti_boundary_sum({1, 1, 0, 0}), make_betti(1, 1, 1, 0));
  EXPECT_EQ(betti_boundary_sum({1, 1, 0, 0}).euler, 1);
}

TEST(Labels, CubeComplementExamples) {
  EXPECT_EQ(betti_cube_complement({1, 0, 0, 0}), make_betti(1, 0, 1, 1));
  EXPECT_EQ(betti_cube_complement({1, 0, 0, 0}).euler, 1);
  EXPECT_EQ(betti_cube_complement({0, 0, 1, 2}), make_betti(1, 2, 3, 1));
  EXPECT_EQ(betti_cube_complement({0, 0, 1, 2}).euler, 1);
}

TEST(Labels, EulerColumnEqualsAlternatingSum) {
  for (const auto& c : valid_counts(4, 4)) {
    EXPECT_EQ(betti_closed_sum(c).euler, 0);
    EXPECT_EQ(betti_closed_sum(c).alternating_sum(), 0);
    EXPECT_EQ(betti_boundary_sum(c).euler, betti_boundary_sum(c).alternating_sum());
    EXPECT_EQ(betti_boundary_sum(c).euler, 1 - c.g + c.h - c.i);
    EXPECT_EQ(betti_cube_complement(c).euler, betti_cube_complement(c).alternating_sum());
    EXPECT_EQ(betti_cube_complement(c).euler, c.g - c.h + c.i);
  }
}

TEST(Labels, ClosedSumIsSelfDual) {
  for (const auto& c : valid_counts(4, 4)) EXPECT_EQ(betti_closed_sum(c).betti[1], betti_closed_sum(c).betti[2]);
}

TEST(Labels, BoundarySumAndComplementSwapMiddleNumbers) {
  for (const auto& c : valid_counts(4, 4)) {
    const auto sum = betti_boundary_sum(c);
    const auto comp = betti_cube_complement(c);
    EXPECT_EQ(sum.betti[1], comp.betti[2]);
    EXPECT_EQ(sum.betti[2], comp.betti[1]);
    // The general duality route agrees with the tabulated complement.
    EXPECT_EQ(betti_complement(4, {sum}), comp);
  }
}

TEST(Labels, RejectsInvalidCounts) {
  EXPECT_THROW(betti_closed_sum({0, 0, 0, 0}), invalid_descriptor_error);
  EXPECT_THROW(betti_boundary_sum({0, 0, 1, 0}), invalid_descriptor_error);
  EXPECT_THROW(betti_cube_complement({-1, 1, 0, 0}), invalid_descriptor_error);
}

TEST(Labels, DisjointUnion) {
  EXPECT_EQ(betti_disjoint_union({make_betti(1, 1)}), make_betti(1, 1));
  const auto two = betti_disjoint_union({make_betti(1, 0, 1), make_betti(1, 0, 1)});
  EXPECT_EQ(two, make_betti(2, 0, 2));
  EXPECT_EQ(two.euler, 4);
  EXPECT_THROW(betti_disjoint_union({}), invalid_descriptor_error);
}

TEST(Labels, DisjointUnionIsAssociativeAndCommutative) {
  const std::vector<BettiVector> parts{make_betti(1, 2, 1), make_betti(1, 1), make_betti(2, 0, 0, 1)};
  const auto abc = betti_disjoint_union(parts);
  EXPECT_EQ(betti_disjoint_union({betti_disjoint_union({parts[0], parts[1]}), parts[2]}), abc);
  EXPECT_EQ(betti_disjoint_union({parts[0], betti_disjoint_union({parts[1], parts[2]})}), abc);
  EXPECT_EQ(betti_disjoint_union({parts[2], parts[0], parts[1]}), abc);
}

TEST(Labels, MultiComplement) {
  EXPECT_EQ(betti_cube_multi_complement({}), make_betti(1));
  EXPECT_EQ(betti_cube_multi_complement({{1, 0, 0, 0}}), make_betti(1, 0, 1, 1));
  EXPECT_EQ(betti_cube_multi_complement({{1, 0, 0, 0}, {0, 1, 0, 0}}), make_betti(1, 1, 1, 2));
  const std::vector<HandleCounts> cutouts{{1, 0, 0, 0}, {0, 1, 0, 0}, {0, 0, 1, 1}};
  std::vector<BettiVector> objects;
  for (const auto& c : cutouts) objects.push_back(betti_boundary_sum(c));
  EXPECT_EQ(betti_cube_multi_complement(cutouts), betti_complement(4, objects));
}

TEST(Labels, ComplementInLowerDimensions) {
  // Cube minus solid torus, and cube minus two balls.
  EXPECT_EQ(betti_complement(3, {make_betti(1, 1)}), make_betti(1, 1, 1));
  EXPECT_EQ(betti_complement(3, {make_betti(1), make_betti(1)}), make_betti(1, 0, 2));
  // Square minus a disc and an annulus.
  EXPECT_EQ(betti_complement(2, {make_betti(1), make_betti(1, 1)}), make_betti(2, 2));
}

TEST(Labels, DescriptorDispatch) {
  ConstructionDescriptor sum;
  sum.family = Family::boundary_sum;
  sum.counts = {1, 1, 0, 0};
  EXPECT_EQ(label_for(sum, 4), make_betti(1, 1, 1, 0));

  ConstructionDescriptor comp;
  comp.family = Family::cube_complement;
  comp.counts = {1, 0, 0, 0};
  EXPECT_EQ(label_for(comp, 4), make_betti(1, 0, 1, 1));
  ConstructionDescriptor other = sum;
  other.counts = {0, 1, 0, 0};
  comp.children = {sum, other};
  EXPECT_EQ(label_for(comp, 4), betti_cube_multi_complement({{1, 1, 0, 0}, {0, 1, 0, 0}}));

  ConstructionDescriptor ball;
  ball.family = Family::embedded_object;
  ball.object_kind = "ball";
  ball.object_label = make_betti(1);
  ConstructionDescriptor scene;
  scene.family = Family::disjoint_union;
  scene.children = {ball, ball, sum};
  EXPECT_EQ(label_for(scene, 4), make_betti(3, 1, 1, 0));

  ConstructionDescriptor bad;
  bad.family = Family::disjoint_union;
  EXPECT_THROW(label_for(bad, 3), invalid_descriptor_error);
  sum.counts = {9, 0, 0, 0};
  EXPECT_THROW(validate_descriptor(sum), invalid_descriptor_error);
  EXPECT_EQ(family_from_name("cube_complement"), Family::cube_complement);
  EXPECT_THROW(family_from_name("klein_bottle"), invalid_descriptor_error);
}

}  // namespace
}  // namespace topovox
