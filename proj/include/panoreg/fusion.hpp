#pragma once

#include <algorithm>
#include <cmath>
#include <utility>

#include "panoreg/errors.hpp"
#include "panoreg/grid.hpp"
#include "panoreg/horizon.hpp"
#include "panoreg/polygon.hpp"
#include "panoreg/pose.hpp"
#include "panoreg/scene.hpp"

namespace panoreg {

// Extrudable 2D layout: a footprint (one or more polygons, holes allowed
// after unions) together with the floor-to-ceiling height. The floor plane
// sits at y = -1 (the camera is the origin at normalized height 1), so the
// solid spans y in [-1, height - 1].
struct LayoutSolid {
  Footprint footprint;
  double height = 0.0;
  bool repaired = false;      // input footprint needed degeneracy repair
  bool disconnected = false;  // union produced multiple components

  double area() const { return footprint_area(footprint); }
};

namespace detail {

// Degenerate-vertex merge (routine simplification), then bounded
// deterministic jitter until the ring is simple. Returns true only when
// the jitter path ran, i.e. the input was genuinely self-intersecting.
inline bool repair_ring(Ring& ring, double scale) {
  Ring merged = merge_degenerate_vertices(ring, 1e-9 * std::max(scale, 1.0));
  if (merged.size() >= 3) ring = std::move(merged);
  if (ring_is_simple(ring)) return false;
  double magnitude = 1e-9 * std::max(scale, 1.0);
  for (int attempt = 0; attempt < 6; ++attempt, magnitude *= 10.0) {
    Ring jittered = ring;
    for (std::size_t i = 0; i < jittered.size(); ++i) {
      const double a = static_cast<double>(splitmix64(i + 1) % 4096) / 4096.0 * 6.283185307179586;
      jittered[i] = jittered[i] + Vec2{std::cos(a), std::sin(a)} * magnitude;
    }
    if (ring_is_simple(jittered)) {
      ring = std::move(jittered);
      return true;
    }
  }
  throw Error(ErrorCode::kClippingFailure, "footprint could not be repaired to a simple ring");
}

}  // namespace detail

// Per-panorama layout: the footprint polygon from floor-derived boundary
// points in u order (ceiling-derived behind the flag) and the estimated
// layout height. Self-intersecting inputs are repaired and flagged.
inline LayoutSolid boundary_to_layout(const HorizonMaps& maps, const SampleGrid& grid,
                                      BoundarySource source = BoundarySource::kFloor) {
  HorizonDepthMap depth;
  const double height = estimate_layout_height(maps.ceiling, maps.floor);
  if (source == BoundarySource::kCeiling) {
    depth = boundary_to_depth(maps.ceiling, height - 1.0, grid.n);
  } else {
    depth = boundary_to_depth(maps.floor, 1.0, grid.n);
  }
  const PlanePointSet points = depth_to_plane_points(depth, grid);

  Ring ring = points.points;
  LayoutSolid out;
  out.height = height;
  out.repaired = detail::repair_ring(ring, ring_bounds(ring).diagonal());
  out.footprint = footprint_from_ring(std::move(ring));
  return out;
}

// Rigidly move a layout (vertices only; the height is pose-invariant).
inline LayoutSolid apply_pose(const LayoutSolid& layout, const PlanarPose& pose) {
  LayoutSolid out = layout;
  for (PolygonWithHoles& part : out.footprint.parts) {
    for (Vec2& p : part.outer) p = pose.apply(p);
    for (Ring& hole : part.holes) {
      for (Vec2& p : hole) p = pose.apply(p);
    }
  }
  return out;
}

// Boolean union of two layouts in a common frame; the fused height is the
// average. A disconnected result is kept (and flagged) so downstream
// metrics honestly penalize a bad pose.
inline LayoutSolid union_layouts(const LayoutSolid& a, const LayoutSolid& b) {
  LayoutSolid out;
  out.footprint = footprint_union(a.footprint, b.footprint);
  if (out.footprint.empty()) {
    throw Error(ErrorCode::kClippingFailure, "union produced an empty footprint");
  }
  out.height = 0.5 * (a.height + b.height);
  out.repaired = a.repaired || b.repaired;
  out.disconnected = out.footprint.parts.size() > 1;
  return out;
}

// Ground-truth layout for a scene, expressed in the pano-1 frame.
inline LayoutSolid scene_layout(const RoomScene& scene) {
  PlanarPose world_to_cam1(scene.cam1.yaw, Vec2{});
  world_to_cam1.t = -world_to_cam1.rotate(scene.cam1.position);
  Ring ring = scene.room.vertices;
  for (Vec2& p : ring) p = world_to_cam1.apply(p);
  LayoutSolid out;
  out.footprint = footprint_from_ring(std::move(ring));
  out.height = scene.ceiling_height;
  return out;
}

}  // namespace panoreg
