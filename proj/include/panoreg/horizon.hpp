#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numbers>
#include <vector>

#include "panoreg/errors.hpp"
#include "panoreg/grid.hpp"
#include "panoreg/vec.hpp"

namespace panoreg {

// Coordinate conventions (fixed once, used everywhere):
//   * Panorama UV: u in [0,1) horizontal (wraps), v in [-1,1] vertical with
//     v = -1 straight up, v = 0 the horizon, v = +1 straight down.
//   * World/camera: y up, camera at the origin, azimuth theta = 2*pi*u
//     measured from +z toward +x, elevation phi = -v*pi/2.
//   * Camera-to-floor distance is normalized to exactly 1 unit; all depths
//     and lengths are expressed in those units.

// Boundary |v| values are clamped to at least this before the tangent in
// the layout-to-depth transform; depth diverges as |v| -> 0.
inline constexpr double kBoundaryVMin = 1e-3;
// Upper guard keeps tan(|v|*pi/2) finite at |v| -> 1.
inline constexpr double kBoundaryVMax = 1.0 - 1e-12;

struct UVCoord {
  double u = 0.0;  // [0, 1), wraps modulo 1
  double v = 0.0;  // [-1, 1]
};

enum class BoundaryKind { kCeiling, kFloor };

// Which boundary feeds a derived computation (registration point sets,
// layout footprints). kBoth concatenates ceiling- and floor-derived data.
enum class BoundarySource { kCeiling, kFloor, kBoth };

// v coordinates of the ceiling or floor boundary over a uniform u grid.
// Ceiling values are negative, floor values positive.
struct BoundaryMap {
  BoundaryKind kind = BoundaryKind::kFloor;
  std::vector<double> values;

  std::size_t size() const { return values.size(); }
};

// Planar (XZ) distances from the camera to the layout boundary, one per
// uniform u sample. Always positive and finite.
struct HorizonDepthMap {
  std::vector<double> values;

  std::size_t size() const { return values.size(); }
};

// Boundary points on the XZ plane, p_i = d_i * (sin 2*pi*u_i, cos 2*pi*u_i).
struct PlanePointSet {
  std::vector<Vec2> points;

  std::size_t size() const { return points.size(); }
};

// Unit direction of a panorama sample: (sin(th)*cos(ph), sin(ph), cos(th)*cos(ph))
// with th = 2*pi*u and ph = -v*pi/2.
inline Vec3 uv_to_direction(const UVCoord& c) {
  const double theta = 2.0 * std::numbers::pi * wrap_unit(c.u);
  const double phi = -c.v * std::numbers::pi / 2.0;
  const double cp = std::cos(phi);
  return Vec3{std::sin(theta) * cp, std::sin(phi), std::cos(theta) * cp};
}

// Planar ray direction on the XZ plane for horizontal coordinate u.
inline Vec2 u_to_ray(double u) {
  const double theta = 2.0 * std::numbers::pi * u;
  return {std::sin(theta), std::cos(theta)};
}

namespace detail {

inline double clamped_abs_v(double v, bool clamp_enabled) {
  double a = std::abs(v);
  if (a <= kBoundaryVMin) {
    if (!clamp_enabled) {
      throw Error(ErrorCode::kDegenerateBoundary,
                  "boundary value too close to the horizon with clamping disabled");
    }
    a = kBoundaryVMin;
  }
  return std::min(a, kBoundaryVMax);
}

inline double median(std::vector<double> values) {
  const std::size_t n = values.size();
  auto mid = values.begin() + static_cast<std::ptrdiff_t>(n / 2);
  std::nth_element(values.begin(), mid, values.end());
  if (n % 2 == 1) return *mid;
  const double hi = *mid;
  const double lo = *std::max_element(values.begin(), mid);
  return 0.5 * (lo + hi);
}

}  // namespace detail

// Layout-to-depth: depth_i = height / tan(|v_i| * pi/2), after resampling
// the boundary from its native n samples to m by cyclic linear
// interpolation (m == n is the identity). `height` is the vertical
// distance from the camera to the plane the boundary lies on (1 for the
// floor by normalization, camera-to-ceiling for the ceiling).
inline HorizonDepthMap boundary_to_depth(const BoundaryMap& b, double height,
                                         std::size_t m = 0, bool clamp_enabled = true) {
  if (!(height > 0.0)) {
    throw Error(ErrorCode::kNonPositiveHeight, "boundary_to_depth requires height > 0");
  }
  if (b.values.empty()) throw Error(ErrorCode::kEmptyInput, "empty boundary map");
  if (m == 0) m = b.values.size();
  const std::vector<double> v = resample_cyclic(b.values, m);
  HorizonDepthMap d;
  d.values.reserve(m);
  for (double vi : v) {
    const double a = detail::clamped_abs_v(vi, clamp_enabled);
    d.values.push_back(height / std::tan(a * std::numbers::pi / 2.0));
  }
  return d;
}

// Inverse of boundary_to_depth (no resampling): v_i = sign * (2/pi) * atan(height / d_i).
inline BoundaryMap depth_to_boundary(const HorizonDepthMap& d, double height,
                                     BoundaryKind kind) {
  if (!(height > 0.0)) {
    throw Error(ErrorCode::kNonPositiveHeight, "depth_to_boundary requires height > 0");
  }
  if (d.values.empty()) throw Error(ErrorCode::kEmptyInput, "empty depth map");
  const double sign = (kind == BoundaryKind::kCeiling) ? -1.0 : 1.0;
  BoundaryMap b;
  b.kind = kind;
  b.values.reserve(d.values.size());
  for (double di : d.values) {
    if (!(di > 0.0) || !std::isfinite(di)) {
      throw Error(ErrorCode::kNonPositiveDepth, "depth values must be positive and finite");
    }
    b.values.push_back(sign * (2.0 / std::numbers::pi) * std::atan(height / di));
  }
  return b;
}

// Depth samples to XZ boundary points along the grid rays.
inline PlanePointSet depth_to_plane_points(const HorizonDepthMap& d, const SampleGrid& grid) {
  if (d.values.size() != grid.n) {
    throw Error(ErrorCode::kLengthMismatch, "depth map length does not match sample grid");
  }
  PlanePointSet p;
  p.points.reserve(d.values.size());
  for (std::size_t i = 0; i < d.values.size(); ++i) {
    p.points.push_back(d.values[i] * u_to_ray(grid.u(i)));
  }
  return p;
}

// Floor-to-ceiling height from paired boundary maps. Per sample the wall
// depth from the floor boundary (camera height 1) gives the
// camera-to-ceiling distance h_c = depth * tan(|v_c|*pi/2); the layout
// height is 1 + median(h_c), the median being robust to boundary noise.
inline double estimate_layout_height(const BoundaryMap& ceiling, const BoundaryMap& floor) {
  if (ceiling.values.size() != floor.values.size()) {
    throw Error(ErrorCode::kLengthMismatch, "ceiling/floor maps must share one grid");
  }
  if (ceiling.values.empty()) throw Error(ErrorCode::kEmptyInput, "empty boundary maps");
  if (ceiling.kind != BoundaryKind::kCeiling || floor.kind != BoundaryKind::kFloor) {
    throw Error(ErrorCode::kDegenerateBoundary, "estimate_layout_height kind mismatch");
  }
  std::vector<double> heights;
  heights.reserve(floor.values.size());
  for (std::size_t i = 0; i < floor.values.size(); ++i) {
    if (!(floor.values[i] > 0.0) || !(ceiling.values[i] < 0.0)) {
      throw Error(ErrorCode::kDegenerateBoundary, "boundary values have the wrong sign");
    }
    const double vf = detail::clamped_abs_v(floor.values[i], true);
    const double vc = detail::clamped_abs_v(ceiling.values[i], true);
    const double floor_depth = 1.0 / std::tan(vf * std::numbers::pi / 2.0);
    heights.push_back(floor_depth * std::tan(vc * std::numbers::pi / 2.0));
  }
  return 1.0 + detail::median(std::move(heights));
}

}  // namespace panoreg
