#include "panoreg/fusion.hpp"

#include <cmath>
#include <numbers>

#include <gtest/gtest.h>

#include "panoreg/metrics.hpp"
#include "panoreg/registration.hpp"
#include "panoreg/rng.hpp"
#include "panoreg/scene.hpp"

namespace panoreg {
namespace {

// Symmetric Hausdorff distance between two ring boundaries, via dense
// sampling of the edges of each against the other.
double hausdorff(const Ring& a, const Ring& b) {
  auto directed = [](const Ring& from, const Ring& to) {
    double worst = 0.0;
    const std::size_t n = from.size();
    for (std::size_t i = 0; i < n; ++i) {
      const Vec2& p = from[i];
      const Vec2& q = from[(i + 1) % n];
      for (int s = 0; s <= 16; ++s) {
        const Vec2 x = p + (q - p) * (static_cast<double>(s) / 16.0);
        worst = std::max(worst, point_ring_distance(to, x));
      }
    }
    return worst;
  };
  return std::max(directed(a, b), directed(b, a));
}

HorizonMaps maps_of_scene_pano1(const RoomScene& scene, const SampleGrid& grid) {
  return ground_truth_maps(scene, grid).first;
}

TEST(BoundaryToLayout, SquareRoomRoundTrip) {
  // Axis-aligned square seen from the center with zero yaw: grid samples
  // land exactly on the walls (corners included at u = 1/8 + k/4), so the
  // footprint reproduces the square.
  RoomScene scene;
  scene.room = RoomPolygon::from_ring({{-2, -2}, {2, -2}, {2, 2}, {-2, 2}});
  scene.cam1 = {{0.0, 0.0}, 0.0};
  scene.cam2 = {{0.5, 0.0}, 0.0};
  scene.ceiling_height = 2.5;
  const SampleGrid grid(256);
  const LayoutSolid layout = boundary_to_layout(maps_of_scene_pano1(scene, grid), grid);
  ASSERT_EQ(layout.footprint.parts.size(), 1u);
  EXPECT_LT(hausdorff(layout.footprint.parts[0].outer, scene.room.vertices), 1e-6);
  EXPECT_NEAR(layout.height, 2.5, 1e-9);
  EXPECT_FALSE(layout.repaired);
}

TEST(BoundaryToLayout, ConstantDepthGivesRegularPolygon) {
  const std::size_t m = 64;
  const SampleGrid grid(m);
  HorizonMaps maps;
  HorizonDepthMap unit{std::vector<double>(m, 1.0)};
  maps.floor = depth_to_boundary(unit, 1.0, BoundaryKind::kFloor);
  maps.ceiling = depth_to_boundary(unit, 1.0, BoundaryKind::kCeiling);
  maps.correspondence.assign(m, 0.0);
  maps.covisibility.assign(m, 1.0);
  const LayoutSolid layout = boundary_to_layout(maps, grid);
  ASSERT_EQ(layout.footprint.parts.size(), 1u);
  const Ring& ring = layout.footprint.parts[0].outer;
  ASSERT_EQ(ring.size(), m);
  for (const Vec2& p : ring) EXPECT_NEAR(p.norm(), 1.0, 1e-12);
  const double expected_area =
      0.5 * static_cast<double>(m) * std::sin(2.0 * std::numbers::pi / static_cast<double>(m));
  EXPECT_NEAR(layout.area(), expected_area, 1e-12);
  EXPECT_NEAR(layout.height, 2.0, 1e-12);
}

TEST(BoundaryToLayout, MirrorBoundariesGiveHeightTwo) {
  const std::size_t m = 16;
  HorizonMaps maps;
  maps.floor = BoundaryMap{BoundaryKind::kFloor, std::vector<double>(m, 0.5)};
  maps.ceiling = BoundaryMap{BoundaryKind::kCeiling, std::vector<double>(m, -0.5)};
  maps.correspondence.assign(m, 0.0);
  maps.covisibility.assign(m, 1.0);
  const LayoutSolid layout = boundary_to_layout(maps, SampleGrid(m));
  EXPECT_NEAR(layout.height, 2.0, 1e-12);
}

TEST(ApplyPose, IdentityAndSymmetry) {
  const Footprint square = footprint_from_ring({{-1, -1}, {1, -1}, {1, 1}, {-1, 1}});
  LayoutSolid layout{square, 2.0, false, false};
  const LayoutSolid same = apply_pose(layout, PlanarPose::identity());
  EXPECT_EQ(same.footprint.parts[0].outer, layout.footprint.parts[0].outer);

  // A half turn maps the centered square onto itself as a point set.
  const LayoutSolid spun = apply_pose(layout, PlanarPose(std::numbers::pi, {0, 0}));
  for (const Vec2& p : spun.footprint.parts[0].outer) {
    EXPECT_NEAR(point_ring_distance(layout.footprint.parts[0].outer, p), 0.0, 1e-12);
  }
  EXPECT_EQ(spun.height, layout.height);
}

TEST(ApplyPose, PreservesArea) {
  Rng rng(15);
  const Footprint fp = footprint_from_ring({{0, 0}, {2, 0}, {2, 1}, {1, 1}, {1, 2}, {0, 2}});
  LayoutSolid layout{fp, 2.0, false, false};
  for (int i = 0; i < 20; ++i) {
    const PlanarPose pose(rng.uniform(-3.0, 3.0), {rng.uniform(-5, 5), rng.uniform(-5, 5)});
    EXPECT_NEAR(apply_pose(layout, pose).area(), layout.area(), 1e-12);
  }
}

TEST(UnionLayouts, IdenticalAndOffsetSquares) {
  const Footprint square = footprint_from_ring({{0, 0}, {1, 0}, {1, 1}, {0, 1}});
  const LayoutSolid a{square, 2.0, false, false};
  const LayoutSolid same = union_layouts(a, a);
  EXPECT_NEAR(same.area(), 1.0, 1e-12);
  EXPECT_FALSE(same.disconnected);

  const Footprint shifted = footprint_from_ring({{0.5, 0}, {1.5, 0}, {1.5, 1}, {0.5, 1}});
  const LayoutSolid b{shifted, 3.0, false, false};
  const LayoutSolid fused = union_layouts(a, b);
  EXPECT_NEAR(fused.area(), 1.5, 1e-12);
  EXPECT_NEAR(fused.height, 2.5, 1e-12);
}

TEST(UnionLayouts, DisjointKeptAndFlagged) {
  const LayoutSolid a{footprint_from_ring({{0, 0}, {1, 0}, {1, 1}, {0, 1}}), 2.0, false, false};
  const LayoutSolid b{footprint_from_ring({{5, 0}, {6, 0}, {6, 1}, {5, 1}}), 2.0, false, false};
  const LayoutSolid fused = union_layouts(a, b);
  EXPECT_TRUE(fused.disconnected);
  EXPECT_EQ(fused.footprint.parts.size(), 2u);
  EXPECT_NEAR(fused.area(), 2.0, 1e-12);
}

TEST(FusedGroundTruth, ReproducesScenePolygon) {
  // Fusing the two ground-truth partial layouts with the ground-truth
  // pose must reproduce the room; convex rooms are fully seen by both.
  Rng rng(33);
  for (int trial = 0; trial < 10; ++trial) {
    const RoomScene scene = make_scene(generate_convex_room(10, 5.0, rng.bits()), rng.bits());
    const SampleGrid grid(256);
    const auto [maps1, maps2] = ground_truth_maps(scene, grid);
    const LayoutSolid l1 = boundary_to_layout(maps1, grid);
    const LayoutSolid l2 = boundary_to_layout(maps2, grid);
    const LayoutSolid fused =
        union_layouts(l1, apply_pose(l2, scene.relative_pose()));
    const LayoutSolid truth = scene_layout(scene);
    EXPECT_GE(iou_2d(fused, truth), 0.999);
    EXPECT_NEAR(fused.height, scene.ceiling_height, 1e-6);
  }
}

TEST(SceneLayout, ExpressedInPano1Frame) {
  RoomScene scene;
  scene.room = RoomPolygon::from_ring({{-2, -2}, {2, -2}, {2, 2}, {-2, 2}});
  scene.cam1 = {{1.0, 0.5}, 0.3};
  scene.cam2 = {{-0.5, 0.0}, -0.2};
  scene.ceiling_height = 2.4;
  const LayoutSolid layout = scene_layout(scene);
  // The camera is the origin of its own frame and must be inside.
  EXPECT_TRUE(footprint_contains(layout.footprint, {0.0, 0.0}));
  EXPECT_NEAR(layout.area(), 16.0, 1e-9);
  EXPECT_EQ(layout.height, 2.4);
}

}  // namespace
}  // namespace panoreg
