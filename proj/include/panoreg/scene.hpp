#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <utility>
#include <vector>

#include "panoreg/errors.hpp"
#include "panoreg/grid.hpp"
#include "panoreg/horizon.hpp"
#include "panoreg/polygon.hpp"
#include "panoreg/pose.hpp"
#include "panoreg/rng.hpp"
#include "panoreg/vec.hpp"

namespace panoreg {

// Cameras are kept at least this fraction of the room diameter away from
// every wall; bounds depths away from zero and v values away from +/-1.
inline constexpr double kCameraClearanceFraction = 0.05;
// Visibility tolerance as a fraction of the room diameter: segments that
// graze a vertex or the destination wall within this count as visible.
inline constexpr double kVisibilityEpsFraction = 1e-6;

// Simple counter-clockwise polygon with at least 4 vertices.
struct RoomPolygon {
  Ring vertices;

  std::size_t size() const { return vertices.size(); }
  double diameter() const { return ring_bounds(vertices).diagonal(); }

  bool is_manhattan() const {
    const std::size_t n = vertices.size();
    for (std::size_t i = 0; i < n; ++i) {
      const Vec2 e = vertices[(i + 1) % n] - vertices[i];
      if (e.x != 0.0 && e.z != 0.0) return false;
    }
    return true;
  }

  static RoomPolygon from_ring(Ring ring) {
    if (ring.size() < 4) {
      throw Error(ErrorCode::kSchemaError, "room polygon needs at least 4 vertices");
    }
    if (!ring_is_simple(ring)) {
      throw Error(ErrorCode::kSchemaError, "room polygon must be simple");
    }
    if (!ring_is_ccw(ring)) std::reverse(ring.begin(), ring.end());
    return RoomPolygon{std::move(ring)};
  }
};

struct Camera {
  Vec2 position;
  double yaw = 0.0;  // radians; pano u maps to world azimuth 2*pi*u + yaw
};

// Ground-truth scene: a room, two cameras at normalized height 1 above the
// floor, and the floor-to-ceiling height (> 1 so cameras sit below the
// ceiling). The relative pose is derived from the camera placements.
struct RoomScene {
  RoomPolygon room;
  Camera cam1;
  Camera cam2;
  double ceiling_height = 2.5;

  // Pose mapping pano-2 coordinates into the pano-1 frame.
  PlanarPose relative_pose() const {
    PlanarPose world_to_cam1(cam1.yaw, Vec2{});
    return PlanarPose(cam1.yaw - cam2.yaw,
                      world_to_cam1.rotate(cam2.position - cam1.position));
  }

  double visibility_eps() const { return kVisibilityEpsFraction * room.diameter(); }
};

// The four 1D maps of one panorama: its ceiling/floor boundaries plus the
// correspondence and covisibility maps toward the other panorama.
struct HorizonMaps {
  BoundaryMap ceiling;
  BoundaryMap floor;
  std::vector<double> correspondence;  // values in [0, 1)
  std::vector<double> covisibility;    // values in [0, 1]

  std::size_t size() const { return floor.values.size(); }
};

struct NoiseSpec {
  double sigma_v = 0.0;        // boundary v noise, std dev
  double sigma_o = 0.0;        // wrapped correspondence noise, u units
  double outlier_frac = 0.0;   // fraction of correspondences resampled uniformly
  double flip_p = 0.0;         // covisibility bit-flip probability
  std::uint64_t seed = 0;

  bool is_zero() const {
    return sigma_v == 0.0 && sigma_o == 0.0 && outlier_frac == 0.0 && flip_p == 0.0;
  }
};

struct RoomSpec {
  std::size_t vertex_budget = 10;
  double extent = 5.0;
  bool manhattan = true;
  std::uint64_t seed = 0;
};

namespace detail {

// First positive ray/polygon-boundary hit distance; direction must be unit
// length. Returns a negative value when nothing is hit.
inline double first_hit_distance(const Ring& ring, const Vec2& origin, const Vec2& dir) {
  double best = -1.0;
  const std::size_t n = ring.size();
  for (std::size_t i = 0; i < n; ++i) {
    const Vec2& a = ring[i];
    const Vec2& b = ring[(i + 1) % n];
    const Vec2 e = b - a;
    const double denom = dir.cross(e);
    if (denom == 0.0) continue;
    const Vec2 w = a - origin;
    const double t = w.cross(e) / denom;
    const double s = w.cross(dir) / denom;
    if (t <= 1e-12) continue;
    if (s < -1e-12 || s > 1.0 + 1e-12) continue;
    if (best < 0.0 || t < best) best = t;
  }
  return best;
}

// True when the open segment from `from` to `to` stays inside the room.
// The terminal wall contact and vertex grazes within eps do not count as
// occlusions.
inline bool segment_unobstructed(const Ring& ring, const Vec2& from, const Vec2& to,
                                 double eps) {
  const double seg_len = (to - from).norm();
  if (seg_len <= eps) return true;
  const std::size_t n = ring.size();
  for (std::size_t i = 0; i < n; ++i) {
    const Vec2& a = ring[i];
    const Vec2& b = ring[(i + 1) % n];
    const auto hit = segment_intersection(from, to, a, b);
    if (!hit) continue;
    const auto [s, t] = *hit;
    if (s * seg_len >= seg_len - eps) continue;  // the destination wall itself
    if (s * seg_len <= eps) continue;            // leaving the source point
    const double edge_len = (b - a).norm();
    if (t * edge_len <= eps || t * edge_len >= edge_len - eps) continue;  // vertex graze
    return false;
  }
  return true;
}

inline bool camera_placement_ok(const RoomPolygon& room, const Vec2& p, double clearance) {
  return point_in_ring(room.vertices, p) && point_ring_distance(room.vertices, p) >= clearance;
}

// Pano u coordinate under which camera `cam` sees world point `w`.
inline double world_point_to_u(const Camera& cam, const Vec2& w) {
  const Vec2 d = w - cam.position;
  const double beta = std::atan2(d.x, d.z);
  return wrap_unit((beta - cam.yaw) / (2.0 * std::numbers::pi));
}

inline bool ring_edges_long_enough(const Ring& r, double min_len) {
  const std::size_t n = r.size();
  for (std::size_t i = 0; i < n; ++i) {
    if ((r[(i + 1) % n] - r[i]).norm() < min_len) return false;
  }
  return true;
}

}  // namespace detail

// Distances from the camera to the first wall along each grid ray. Ray i
// points in world direction (sin(2*pi*u_i + yaw), cos(2*pi*u_i + yaw)).
inline HorizonDepthMap cast_horizon_depth(const RoomPolygon& room, const Vec2& cam,
                                          double yaw, const SampleGrid& grid) {
  if (!point_in_ring(room.vertices, cam)) {
    throw Error(ErrorCode::kCameraOutsideRoom, "camera must be strictly inside the room");
  }
  HorizonDepthMap d;
  d.values.reserve(grid.n);
  for (std::size_t i = 0; i < grid.n; ++i) {
    const double angle = 2.0 * std::numbers::pi * grid.u(i) + yaw;
    const Vec2 dir{std::sin(angle), std::cos(angle)};
    const double t = detail::first_hit_distance(room.vertices, cam, dir);
    if (t <= 0.0) {
      throw Error(ErrorCode::kNoIntersection, "interior ray missed the room boundary");
    }
    d.values.push_back(t);
  }
  return d;
}

// The exact maps a perfect predictor would output for both panoramas.
inline std::pair<HorizonMaps, HorizonMaps> ground_truth_maps(const RoomScene& scene,
                                                             const SampleGrid& grid) {
  if (!(scene.ceiling_height > 1.0)) {
    throw Error(ErrorCode::kSchemaError, "ceiling_height must exceed the camera height 1");
  }
  const double eps = scene.visibility_eps();
  const double ceiling_gap = scene.ceiling_height - 1.0;

  auto build = [&](const Camera& self, const Camera& other) {
    HorizonMaps maps;
    const HorizonDepthMap depth = cast_horizon_depth(scene.room, self.position, self.yaw, grid);
    maps.floor = depth_to_boundary(depth, 1.0, BoundaryKind::kFloor);
    maps.ceiling = depth_to_boundary(depth, ceiling_gap, BoundaryKind::kCeiling);
    maps.correspondence.reserve(grid.n);
    maps.covisibility.reserve(grid.n);
    for (std::size_t i = 0; i < grid.n; ++i) {
      const double angle = 2.0 * std::numbers::pi * grid.u(i) + self.yaw;
      const Vec2 wall = self.position + depth.values[i] * Vec2{std::sin(angle), std::cos(angle)};
      maps.correspondence.push_back(detail::world_point_to_u(other, wall));
      const bool visible =
          detail::segment_unobstructed(scene.room.vertices, other.position, wall, eps);
      maps.covisibility.push_back(visible ? 1.0 : 0.0);
    }
    return maps;
  };

  return {build(scene.cam1, scene.cam2), build(scene.cam2, scene.cam1)};
}

// Simulated prediction error. Substreams are derived per component so the
// exact draw interleaving is independent of which noise terms are active;
// an all-zero spec reproduces the input exactly.
inline HorizonMaps perturb_maps(const HorizonMaps& maps, const NoiseSpec& noise) {
  HorizonMaps out = maps;
  const std::size_t n = maps.size();

  auto perturb_boundary = [](std::vector<double>& values, double sigma, double sign, Rng& rng) {
    for (double& v : values) {
      v += sigma * rng.normal();
      const double mag = std::clamp(std::abs(v), kBoundaryVMin, 1.0 - 1e-6);
      v = sign * mag;
    }
  };

  Rng rng_ceiling(derive_seed(noise.seed, 1));
  Rng rng_floor(derive_seed(noise.seed, 2));
  perturb_boundary(out.ceiling.values, noise.sigma_v, -1.0, rng_ceiling);
  perturb_boundary(out.floor.values, noise.sigma_v, 1.0, rng_floor);

  Rng rng_corr(derive_seed(noise.seed, 3));
  for (double& o : out.correspondence) {
    o = wrap_unit(o + noise.sigma_o * rng_corr.normal());
  }

  const std::size_t n_outliers =
      static_cast<std::size_t>(std::floor(noise.outlier_frac * static_cast<double>(n)));
  if (n_outliers > 0) {
    Rng rng_select(derive_seed(noise.seed, 4));
    Rng rng_value(derive_seed(noise.seed, 5));
    std::vector<std::size_t> indices(n);
    for (std::size_t i = 0; i < n; ++i) indices[i] = i;
    for (std::size_t i = n - 1; i > 0; --i) {
      std::swap(indices[i], indices[rng_select.index(i + 1)]);
    }
    for (std::size_t k = 0; k < n_outliers; ++k) {
      out.correspondence[indices[k]] = rng_value.uniform();
    }
  }

  if (noise.flip_p > 0.0) {
    Rng rng_flip(derive_seed(noise.seed, 6));
    for (double& c : out.covisibility) {
      if (rng_flip.uniform() < noise.flip_p) c = 1.0 - c;
    }
  }
  return out;
}

// Randomized room generators. All are deterministic per seed and retry a
// bounded number of times before failing.

inline RoomPolygon generate_room(const RoomSpec& spec) {
  if (spec.vertex_budget < 4) {
    throw Error(ErrorCode::kGenerationFailed, "vertex_budget must be at least 4");
  }
  if (!(spec.extent > 0.0)) {
    throw Error(ErrorCode::kGenerationFailed, "extent must be positive");
  }
  const double min_edge = 0.02 * spec.extent;

  if (!spec.manhattan) {
    // Star polygon: sorted angles with a minimum gap, random radii.
    const std::size_t k = spec.vertex_budget;
    Rng rng(derive_seed(spec.seed, 101));
    for (int attempt = 0; attempt < 64; ++attempt) {
      std::vector<double> angles(k);
      for (double& a : angles) a = rng.uniform(0.0, 2.0 * std::numbers::pi);
      std::sort(angles.begin(), angles.end());
      bool gaps_ok = true;
      for (std::size_t i = 0; i < k; ++i) {
        const double next = (i + 1 < k) ? angles[i + 1] : angles[0] + 2.0 * std::numbers::pi;
        if (next - angles[i] < 0.15 * (2.0 * std::numbers::pi / static_cast<double>(k))) {
          gaps_ok = false;
          break;
        }
      }
      if (!gaps_ok) continue;
      Ring ring;
      ring.reserve(k);
      for (double a : angles) {
        const double r = rng.uniform(0.25 * spec.extent, 0.5 * spec.extent);
        ring.emplace_back(r * std::cos(a), r * std::sin(a));
      }
      if (!detail::ring_edges_long_enough(ring, min_edge)) continue;
      if (!ring_is_simple(ring)) continue;
      return RoomPolygon::from_ring(std::move(ring));
    }
    throw Error(ErrorCode::kGenerationFailed, "star room generation exhausted retries");
  }

  // Manhattan: union of axis-aligned rectangles, each centered inside the
  // running union so the result stays connected.
  Rng rng(derive_seed(spec.seed, 102));
  const std::size_t max_rects =
      std::max<std::size_t>(1, std::min<std::size_t>(4, (spec.vertex_budget - 4) / 2));
  for (int attempt = 0; attempt < 64; ++attempt) {
    const std::size_t n_rects = 1 + rng.index(max_rects);
    auto random_rect = [&](const Vec2& center, double scale) {
      const double w = rng.uniform(0.3, 0.6) * scale;
      const double h = rng.uniform(0.3, 0.6) * scale;
      return Ring{{center.x - w, center.z - h},
                  {center.x + w, center.z - h},
                  {center.x + w, center.z + h},
                  {center.x - w, center.z + h}};
    };
    Footprint shape = footprint_from_ring(random_rect(Vec2{0.0, 0.0}, spec.extent));
    bool ok = true;
    for (std::size_t r = 1; r < n_rects && ok; ++r) {
      const BoundingBox bounds = footprint_bounds(shape);
      Vec2 center;
      bool placed = false;
      for (int tries = 0; tries < 64; ++tries) {
        center = Vec2{rng.uniform(bounds.lo.x, bounds.hi.x), rng.uniform(bounds.lo.z, bounds.hi.z)};
        if (footprint_contains(shape, center)) {
          placed = true;
          break;
        }
      }
      if (!placed) {
        ok = false;
        break;
      }
      shape = footprint_union(shape, footprint_from_ring(random_rect(center, 0.7 * spec.extent)));
    }
    if (!ok || shape.parts.size() != 1 || !shape.parts.front().holes.empty()) continue;
    Ring ring = merge_degenerate_vertices(shape.parts.front().outer, 1e-9);
    if (ring.size() < 4 || ring.size() > spec.vertex_budget) continue;
    if (!detail::ring_edges_long_enough(ring, min_edge)) continue;
    if (!ring_is_simple(ring)) continue;
    RoomPolygon room = RoomPolygon::from_ring(std::move(ring));
    if (!room.is_manhattan()) continue;
    return room;
  }
  throw Error(ErrorCode::kGenerationFailed, "manhattan room generation exhausted retries");
}

// Convex room from the hull of random points; used by experiments that
// need all-ones covisibility.
inline RoomPolygon generate_convex_room(std::size_t vertex_budget, double extent,
                                        std::uint64_t seed) {
  if (vertex_budget < 4) {
    throw Error(ErrorCode::kGenerationFailed, "vertex_budget must be at least 4");
  }
  Rng rng(derive_seed(seed, 103));
  const double min_edge = 0.02 * extent;
  for (int attempt = 0; attempt < 128; ++attempt) {
    std::vector<Vec2> pts;
    const std::size_t n = vertex_budget + 6;
    pts.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
      const double a = rng.uniform(0.0, 2.0 * std::numbers::pi);
      const double r = 0.5 * extent * std::sqrt(rng.uniform());
      pts.emplace_back(r * std::cos(a), r * std::sin(a));
    }
    // Monotone-chain convex hull.
    std::sort(pts.begin(), pts.end(), [](const Vec2& a, const Vec2& b) {
      return a.x < b.x || (a.x == b.x && a.z < b.z);
    });
    auto half_hull = [&](auto begin, auto end) {
      Ring h;
      for (auto it = begin; it != end; ++it) {
        while (h.size() >= 2 && (h[h.size() - 1] - h[h.size() - 2]).cross(*it - h.back()) <= 0.0) {
          h.pop_back();
        }
        h.push_back(*it);
      }
      return h;
    };
    Ring lower = half_hull(pts.begin(), pts.end());
    Ring upper = half_hull(pts.rbegin(), pts.rend());
    lower.pop_back();
    upper.pop_back();
    Ring hull = std::move(lower);
    hull.insert(hull.end(), upper.begin(), upper.end());
    if (hull.size() < 4 || hull.size() > vertex_budget) continue;
    if (!detail::ring_edges_long_enough(hull, min_edge)) continue;
    return RoomPolygon::from_ring(std::move(hull));
  }
  throw Error(ErrorCode::kGenerationFailed, "convex room generation exhausted retries");
}

// L-shaped room (6 vertices) with randomized arm widths. Arm bounding
// boxes are reported so cameras can be forced into different arms.
struct LRoom {
  RoomPolygon room;
  BoundingBox arm_a;  // bottom bar
  BoundingBox arm_b;  // left column above the bar
};

inline LRoom generate_l_room(double extent, std::uint64_t seed) {
  Rng rng(derive_seed(seed, 104));
  const double width = rng.uniform(0.7, 1.0) * extent;
  const double height = rng.uniform(0.7, 1.0) * extent;
  const double notch_x = rng.uniform(0.35, 0.65) * width;
  const double notch_z = rng.uniform(0.35, 0.65) * height;
  const Vec2 shift{-width / 2.0, -height / 2.0};
  Ring ring{{0.0, 0.0},     {width, 0.0},   {width, notch_z},
            {notch_x, notch_z}, {notch_x, height}, {0.0, height}};
  for (Vec2& p : ring) p = p + shift;
  LRoom out;
  out.room = RoomPolygon::from_ring(std::move(ring));
  out.arm_a.expand(shift);
  out.arm_a.expand(Vec2{width, notch_z} + shift);
  out.arm_b.expand(Vec2{0.0, notch_z} + shift);
  out.arm_b.expand(Vec2{notch_x, height} + shift);
  return out;
}

namespace detail {

inline Vec2 sample_camera(const RoomPolygon& room, const BoundingBox& box, double clearance,
                          Rng& rng) {
  for (int tries = 0; tries < 1024; ++tries) {
    const Vec2 p{rng.uniform(box.lo.x, box.hi.x), rng.uniform(box.lo.z, box.hi.z)};
    if (camera_placement_ok(room, p, clearance)) return p;
  }
  throw Error(ErrorCode::kGenerationFailed, "camera placement exhausted retries");
}

}  // namespace detail

// Completes a scene around an existing room: camera placement with
// clearance, per-camera yaw, and a ceiling height.
inline RoomScene make_scene(RoomPolygon room, std::uint64_t seed,
                            double ceiling_min = 1.6, double ceiling_max = 3.0) {
  Rng rng(derive_seed(seed, 105));
  const double clearance = kCameraClearanceFraction * room.diameter();
  const BoundingBox bounds = ring_bounds(room.vertices);
  RoomScene scene;
  scene.cam1.position = detail::sample_camera(room, bounds, clearance, rng);
  scene.cam2.position = detail::sample_camera(room, bounds, clearance, rng);
  scene.cam1.yaw = wrap_angle(rng.uniform(-std::numbers::pi, std::numbers::pi));
  scene.cam2.yaw = wrap_angle(rng.uniform(-std::numbers::pi, std::numbers::pi));
  scene.ceiling_height = rng.uniform(ceiling_min, ceiling_max);
  scene.room = std::move(room);
  return scene;
}

// Scene on an L-shaped room with the cameras forced into different arms.
inline RoomScene make_l_scene(double extent, std::uint64_t seed) {
  const LRoom l = generate_l_room(extent, seed);
  Rng rng(derive_seed(seed, 106));
  const double clearance = kCameraClearanceFraction * l.room.diameter();
  RoomScene scene;
  scene.cam1.position = detail::sample_camera(l.room, l.arm_a, clearance, rng);
  scene.cam2.position = detail::sample_camera(l.room, l.arm_b, clearance, rng);
  scene.cam1.yaw = wrap_angle(rng.uniform(-std::numbers::pi, std::numbers::pi));
  scene.cam2.yaw = wrap_angle(rng.uniform(-std::numbers::pi, std::numbers::pi));
  scene.ceiling_height = rng.uniform(1.6, 3.0);
  scene.room = l.room;
  return scene;
}

}  // namespace panoreg
