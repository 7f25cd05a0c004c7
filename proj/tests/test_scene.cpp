#include "panoreg/scene.hpp"

#include <cmath>
#include <numbers>

#include <gtest/gtest.h>

#include "panoreg/rng.hpp"

namespace panoreg {
namespace {

template <typename F>
void ExpectError(F&& f, ErrorCode code) {
  try {
    f();
    FAIL() << "expected " << error_code_name(code);
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), code) << e.what();
  }
}

Ring square_room(double half = 2.0) {
  return {{-half, -half}, {half, -half}, {half, half}, {-half, half}};
}

// Independent ray-cast oracle: intersects the ray with the infinite line
// of every edge via homogeneous line coordinates, then filters to the
// segment and the forward ray. Deliberately a different formulation than
// the implementation.
double oracle_first_hit(const Ring& room, const Vec2& origin, double angle) {
  const Vec2 dir{std::sin(angle), std::cos(angle)};
  double best = -1.0;
  const std::size_t n = room.size();
  for (std::size_t i = 0; i < n; ++i) {
    const Vec2& a = room[i];
    const Vec2& b = room[(i + 1) % n];
    // Line through a, b as (l0, l1, l2) with l0*x + l1*z + l2 = 0.
    const double l0 = b.z - a.z;
    const double l1 = a.x - b.x;
    const double l2 = -(l0 * a.x + l1 * a.z);
    const double denom = l0 * dir.x + l1 * dir.z;
    if (std::abs(denom) < 1e-300) continue;
    const double t = -(l0 * origin.x + l1 * origin.z + l2) / denom;
    if (t <= 1e-12) continue;
    const Vec2 hit = origin + dir * t;
    // On-segment check by projection onto the edge.
    const Vec2 e = b - a;
    const double s = (hit - a).dot(e) / e.squared_norm();
    if (s < -1e-9 || s > 1.0 + 1e-9) continue;
    if (best < 0.0 || t < best) best = t;
  }
  return best;
}

double pano_u_of_point(const Vec2& cam, double yaw, const Vec2& w) {
  const Vec2 d = w - cam;
  return wrap_unit((std::atan2(d.x, d.z) - yaw) / (2.0 * std::numbers::pi));
}

double cyclic_diff(double a, double b) {
  const double d = std::abs(a - b);
  return std::min(d, 1.0 - d);
}

TEST(CastHorizonDepth, SquareRoomClosedForm) {
  const RoomPolygon room = RoomPolygon::from_ring(square_room());
  const SampleGrid grid(8);
  const HorizonDepthMap center = cast_horizon_depth(room, {0.0, 0.0}, 0.0, grid);
  EXPECT_NEAR(center.values[0], 2.0, 1e-12);                   // u = 0, +z wall
  EXPECT_NEAR(center.values[1], 2.0 * std::sqrt(2.0), 1e-12);  // u = 0.125, corner
  const HorizonDepthMap offset = cast_horizon_depth(room, {1.0, 0.0}, 0.0, grid);
  EXPECT_NEAR(offset.values[2], 1.0, 1e-12);  // u = 0.25, wall x = 2
}

TEST(CastHorizonDepth, CameraOutside) {
  const RoomPolygon room = RoomPolygon::from_ring(square_room());
  ExpectError([&] { cast_horizon_depth(room, {3.0, 0.0}, 0.0, SampleGrid(8)); },
              ErrorCode::kCameraOutsideRoom);
}

TEST(CastHorizonDepth, MatchesBruteForceOracle) {
  Rng rng(42);
  for (int trial = 0; trial < 200; ++trial) {
    RoomSpec spec;
    spec.manhattan = (trial % 2 == 0);
    spec.vertex_budget = spec.manhattan ? 10 : 7;
    spec.extent = rng.uniform(3.0, 8.0);
    spec.seed = rng.bits();
    const RoomPolygon room = generate_room(spec);
    const RoomScene scene = make_scene(room, rng.bits());
    const SampleGrid grid(16);
    const HorizonDepthMap d =
        cast_horizon_depth(scene.room, scene.cam1.position, scene.cam1.yaw, grid);
    for (std::size_t i = 0; i < grid.n; ++i) {
      const double angle = 2.0 * std::numbers::pi * grid.u(i) + scene.cam1.yaw;
      const double expected = oracle_first_hit(scene.room.vertices, scene.cam1.position, angle);
      ASSERT_GT(expected, 0.0);
      EXPECT_NEAR(d.values[i], expected, 1e-9);
    }
  }
}

TEST(GenerateRoom, MinimalManhattanBudgetIsRectangle) {
  const RoomPolygon room = generate_room({4, 4.0, true, 123});
  ASSERT_EQ(room.size(), 4u);
  EXPECT_TRUE(room.is_manhattan());
  EXPECT_TRUE(ring_is_ccw(room.vertices));
}

TEST(GenerateRoom, DeterministicPerSeed) {
  const RoomPolygon a = generate_room({10, 5.0, true, 99});
  const RoomPolygon b = generate_room({10, 5.0, true, 99});
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(a.vertices[i].x, b.vertices[i].x);
    EXPECT_EQ(a.vertices[i].z, b.vertices[i].z);
  }
  const RoomPolygon c = generate_room({10, 5.0, true, 100});
  EXPECT_TRUE(a.size() != c.size() || !(a.vertices[0] == c.vertices[0]));
}

TEST(GenerateRoom, OutputsAreSimpleAndBudgeted) {
  for (std::uint64_t seed = 0; seed < 40; ++seed) {
    const RoomPolygon manhattan = generate_room({12, 6.0, true, seed});
    EXPECT_TRUE(ring_is_simple(manhattan.vertices));
    EXPECT_TRUE(manhattan.is_manhattan());
    EXPECT_LE(manhattan.size(), 12u);
    EXPECT_GE(manhattan.size(), 4u);

    const RoomPolygon star = generate_room({9, 6.0, false, seed});
    EXPECT_TRUE(ring_is_simple(star.vertices));
    EXPECT_EQ(star.size(), 9u);
    EXPECT_TRUE(ring_is_ccw(star.vertices));
  }
}

TEST(GenerateRoom, RejectsBadSpecs) {
  ExpectError([] { generate_room({3, 4.0, true, 1}); }, ErrorCode::kGenerationFailed);
  ExpectError([] { generate_room({4, 0.0, true, 1}); }, ErrorCode::kGenerationFailed);
}

TEST(GenerateConvexRoom, ConvexAndBudgeted) {
  for (std::uint64_t seed = 0; seed < 40; ++seed) {
    const RoomPolygon room = generate_convex_room(10, 5.0, seed);
    EXPECT_GE(room.size(), 4u);
    EXPECT_LE(room.size(), 10u);
    const std::size_t n = room.size();
    for (std::size_t i = 0; i < n; ++i) {
      const Vec2 e1 = room.vertices[(i + 1) % n] - room.vertices[i];
      const Vec2 e2 = room.vertices[(i + 2) % n] - room.vertices[(i + 1) % n];
      EXPECT_GT(e1.cross(e2), 0.0);
    }
  }
}

TEST(MakeScene, CameraClearanceHolds) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const RoomPolygon room = generate_room({10, 5.0, true, seed});
    const RoomScene scene = make_scene(room, seed * 7 + 1);
    const double clearance = kCameraClearanceFraction * scene.room.diameter();
    EXPECT_TRUE(point_in_ring(scene.room.vertices, scene.cam1.position));
    EXPECT_TRUE(point_in_ring(scene.room.vertices, scene.cam2.position));
    EXPECT_GE(point_ring_distance(scene.room.vertices, scene.cam1.position), clearance);
    EXPECT_GE(point_ring_distance(scene.room.vertices, scene.cam2.position), clearance);
    EXPECT_GT(scene.ceiling_height, 1.0);
  }
}

TEST(RelativePose, MapsPano2PointsIntoPano1) {
  // The pose must satisfy p1 = R * p2 + t for a world point seen by both.
  Rng rng(5);
  for (int trial = 0; trial < 100; ++trial) {
    RoomScene scene;
    scene.cam1 = {{rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0)}, rng.uniform(-3.0, 3.0)};
    scene.cam2 = {{rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0)}, rng.uniform(-3.0, 3.0)};
    const Vec2 w{rng.uniform(-4.0, 4.0), rng.uniform(-4.0, 4.0)};
    auto to_frame = [](const Camera& cam, const Vec2& world) {
      PlanarPose world_to_cam(cam.yaw, Vec2{});
      return world_to_cam.rotate(world - cam.position);
    };
    const Vec2 p1 = to_frame(scene.cam1, w);
    const Vec2 p2 = to_frame(scene.cam2, w);
    const Vec2 mapped = scene.relative_pose().apply(p2);
    EXPECT_NEAR(mapped.x, p1.x, 1e-12);
    EXPECT_NEAR(mapped.z, p1.z, 1e-12);
  }
}

TEST(GroundTruthMaps, CorrespondenceClosedForm) {
  // Square room, cam1 at the origin, cam2 at (1, 0), both yaws zero. The
  // u = 0 ray hits (0, 2); seen from cam2 that is direction (-1, 2).
  RoomScene scene;
  scene.room = RoomPolygon::from_ring(square_room());
  scene.cam1 = {{0.0, 0.0}, 0.0};
  scene.cam2 = {{1.0, 0.0}, 0.0};
  scene.ceiling_height = 2.5;
  const auto [maps1, maps2] = ground_truth_maps(scene, SampleGrid(8));
  EXPECT_NEAR(maps1.correspondence[0], 0.9262081911747834, 1e-12);
  for (double c : maps1.covisibility) EXPECT_EQ(c, 1.0);  // convex room
}

TEST(GroundTruthMaps, IdentitySceneGivesIdentityCorrespondence) {
  RoomScene scene;
  scene.room = RoomPolygon::from_ring(square_room());
  scene.cam1 = {{0.3, -0.2}, 0.7};
  scene.cam2 = scene.cam1;
  scene.ceiling_height = 2.2;
  const SampleGrid grid(32);
  const auto [maps1, maps2] = ground_truth_maps(scene, grid);
  for (std::size_t i = 0; i < grid.n; ++i) {
    EXPECT_NEAR(cyclic_diff(maps1.correspondence[i], grid.u(i)), 0.0, 1e-12);
  }
}

TEST(GroundTruthMaps, BoundaryMapsRoundTripDepths) {
  const RoomScene scene = make_scene(generate_room({10, 5.0, true, 3}), 11);
  const SampleGrid grid(64);
  const auto [maps1, maps2] = ground_truth_maps(scene, grid);
  const HorizonDepthMap cast =
      cast_horizon_depth(scene.room, scene.cam1.position, scene.cam1.yaw, grid);
  const HorizonDepthMap from_floor = boundary_to_depth(maps1.floor, 1.0);
  const HorizonDepthMap from_ceiling =
      boundary_to_depth(maps1.ceiling, scene.ceiling_height - 1.0);
  for (std::size_t i = 0; i < grid.n; ++i) {
    EXPECT_NEAR(from_floor.values[i], cast.values[i], 1e-9 * cast.values[i]);
    EXPECT_NEAR(from_ceiling.values[i], cast.values[i], 1e-9 * cast.values[i]);
  }
  EXPECT_NEAR(estimate_layout_height(maps1.ceiling, maps1.floor), scene.ceiling_height, 1e-9);
}

TEST(GroundTruthMaps, CycleConsistentAtCovisibleSamples) {
  Rng rng(19);
  for (int trial = 0; trial < 20; ++trial) {
    const RoomPolygon room = generate_room({12, 6.0, trial % 2 == 0, rng.bits()});
    const RoomScene scene = make_scene(room, rng.bits());
    const SampleGrid grid(64);
    const auto [maps1, maps2] = ground_truth_maps(scene, grid);
    const HorizonDepthMap d1 =
        cast_horizon_depth(scene.room, scene.cam1.position, scene.cam1.yaw, grid);
    for (std::size_t i = 0; i < grid.n; ++i) {
      if (maps1.covisibility[i] < 0.5) continue;
      const double angle = 2.0 * std::numbers::pi * grid.u(i) + scene.cam1.yaw;
      const Vec2 wall =
          scene.cam1.position + d1.values[i] * Vec2{std::sin(angle), std::cos(angle)};
      // Recast from cam2 toward the correspondence direction; covisible
      // samples must land on the same wall point.
      const double angle2 =
          2.0 * std::numbers::pi * maps1.correspondence[i] + scene.cam2.yaw;
      const double t2 = oracle_first_hit(scene.room.vertices, scene.cam2.position, angle2);
      ASSERT_GT(t2, 0.0);
      const Vec2 wall2 =
          scene.cam2.position + t2 * Vec2{std::sin(angle2), std::cos(angle2)};
      const double u_back = pano_u_of_point(scene.cam1.position, scene.cam1.yaw, wall2);
      EXPECT_NEAR(cyclic_diff(u_back, grid.u(i)), 0.0, 1e-9)
          << "wall=(" << wall.x << "," << wall.z << ")";
    }
  }
}

TEST(GroundTruthMaps, ConvexCorrespondenceIsCircular) {
  Rng rng(29);
  for (int trial = 0; trial < 10; ++trial) {
    const RoomPolygon room = generate_convex_room(10, 5.0, rng.bits());
    const RoomScene scene = make_scene(room, rng.bits());
    const SampleGrid grid(128);
    const auto [maps1, maps2] = ground_truth_maps(scene, grid);
    double winding = 0.0;
    for (std::size_t i = 0; i < grid.n; ++i) {
      const double step = wrap_unit(maps1.correspondence[(i + 1) % grid.n] -
                                    maps1.correspondence[i]);
      EXPECT_GT(step, 0.0);
      EXPECT_LT(step, 1.0);
      winding += step;
    }
    EXPECT_NEAR(winding, 1.0, 1e-9);
  }
}

TEST(GroundTruthMaps, LScenesHaveOcclusion) {
  int scenes_with_occlusion = 0;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const RoomScene scene = make_l_scene(6.0, seed);
    const auto [maps1, maps2] = ground_truth_maps(scene, SampleGrid(128));
    bool any_zero = false;
    for (double c : maps1.covisibility) any_zero |= (c == 0.0);
    scenes_with_occlusion += any_zero ? 1 : 0;
  }
  // Cameras in different arms of an L almost always occlude some samples.
  EXPECT_GE(scenes_with_occlusion, 8);
}

TEST(PerturbMaps, ZeroNoiseIsIdentity) {
  const RoomScene scene = make_scene(generate_room({8, 5.0, true, 21}), 8);
  const auto [maps1, maps2] = ground_truth_maps(scene, SampleGrid(32));
  const HorizonMaps same = perturb_maps(maps1, NoiseSpec{0.0, 0.0, 0.0, 0.0, 77});
  EXPECT_EQ(same.ceiling.values, maps1.ceiling.values);
  EXPECT_EQ(same.floor.values, maps1.floor.values);
  EXPECT_EQ(same.correspondence, maps1.correspondence);
  EXPECT_EQ(same.covisibility, maps1.covisibility);
}

TEST(PerturbMaps, OutlierCountUsesFloor) {
  const RoomScene scene = make_scene(generate_room({8, 5.0, true, 22}), 9);
  const auto [maps1, maps2] = ground_truth_maps(scene, SampleGrid(256));
  NoiseSpec noise;
  noise.outlier_frac = 0.3;
  noise.seed = 5;
  const HorizonMaps noisy = perturb_maps(maps1, noise);
  std::size_t changed = 0;
  for (std::size_t i = 0; i < 256; ++i) {
    changed += (noisy.correspondence[i] != maps1.correspondence[i]) ? 1 : 0;
  }
  EXPECT_EQ(changed, 76u);  // floor(0.3 * 256)
  EXPECT_EQ(noisy.floor.values, maps1.floor.values);
}

TEST(PerturbMaps, DeterministicAndSeedSensitive) {
  const RoomScene scene = make_scene(generate_room({8, 5.0, true, 23}), 10);
  const auto [maps1, maps2] = ground_truth_maps(scene, SampleGrid(64));
  NoiseSpec noise{0.01, 0.01, 0.2, 0.05, 42};
  const HorizonMaps a = perturb_maps(maps1, noise);
  const HorizonMaps b = perturb_maps(maps1, noise);
  EXPECT_EQ(a.ceiling.values, b.ceiling.values);
  EXPECT_EQ(a.correspondence, b.correspondence);
  EXPECT_EQ(a.covisibility, b.covisibility);
  noise.seed = 43;
  const HorizonMaps c = perturb_maps(maps1, noise);
  EXPECT_NE(a.correspondence, c.correspondence);
}

TEST(PerturbMaps, BoundaryNoiseKeepsValidRanges) {
  const RoomScene scene = make_scene(generate_room({8, 5.0, true, 24}), 12);
  const auto [maps1, maps2] = ground_truth_maps(scene, SampleGrid(64));
  NoiseSpec noise;
  noise.sigma_v = 2.0;  // huge noise to exercise the clamps
  noise.seed = 3;
  const HorizonMaps noisy = perturb_maps(maps1, noise);
  for (double v : noisy.ceiling.values) {
    EXPECT_LT(v, 0.0);
    EXPECT_GE(v, -(1.0 - 1e-7));
  }
  for (double v : noisy.floor.values) {
    EXPECT_GT(v, 0.0);
    EXPECT_LE(v, 1.0 - 1e-7);
  }
  for (double o : noisy.correspondence) {
    EXPECT_GE(o, 0.0);
    EXPECT_LT(o, 1.0);
  }
}

TEST(PerturbMaps, FlipProbabilityOneFlipsAll) {
  const RoomScene scene = make_l_scene(6.0, 2);
  const auto [maps1, maps2] = ground_truth_maps(scene, SampleGrid(64));
  NoiseSpec noise;
  noise.flip_p = 1.0;
  noise.seed = 1;
  const HorizonMaps flipped = perturb_maps(maps1, noise);
  for (std::size_t i = 0; i < 64; ++i) {
    EXPECT_EQ(flipped.covisibility[i], 1.0 - maps1.covisibility[i]);
  }
}

}  // namespace
}  // namespace panoreg
