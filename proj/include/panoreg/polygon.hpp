#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <utility>
#include <vector>

// Overlay coordinate rescaling (still the default in older Boost releases)
// snaps vertices to an integer grid and costs ~1e-8 of relative area
// precision; newer releases dropped it. Opt out explicitly.
#define BOOST_GEOMETRY_NO_ROBUSTNESS

#include <boost/geometry.hpp>
#include <boost/geometry/geometries/multi_polygon.hpp>
#include <boost/geometry/geometries/point_xy.hpp>
#include <boost/geometry/geometries/polygon.hpp>

#include "panoreg/errors.hpp"
#include "panoreg/rng.hpp"
#include "panoreg/vec.hpp"

namespace panoreg {

// A ring is a closed vertex loop stored without the repeated end vertex.
using Ring = std::vector<Vec2>;

struct PolygonWithHoles {
  Ring outer;               // counter-clockwise
  std::vector<Ring> holes;  // clockwise
};

// General planar region: zero or more disjoint polygons, each possibly
// with holes. Union results live here.
struct Footprint {
  std::vector<PolygonWithHoles> parts;

  bool empty() const { return parts.empty(); }
};

// Signed shoelace area; positive for counter-clockwise rings.
inline double ring_signed_area(const Ring& r) {
  double a = 0.0;
  const std::size_t n = r.size();
  for (std::size_t i = 0; i < n; ++i) {
    const Vec2& p = r[i];
    const Vec2& q = r[(i + 1) % n];
    a += p.cross(q);
  }
  return 0.5 * a;
}

inline bool ring_is_ccw(const Ring& r) { return ring_signed_area(r) > 0.0; }

inline double ring_area(const Ring& r) { return std::abs(ring_signed_area(r)); }

struct BoundingBox {
  Vec2 lo{std::numeric_limits<double>::max(), std::numeric_limits<double>::max()};
  Vec2 hi{std::numeric_limits<double>::lowest(), std::numeric_limits<double>::lowest()};

  void expand(const Vec2& p) {
    lo.x = std::min(lo.x, p.x);
    lo.z = std::min(lo.z, p.z);
    hi.x = std::max(hi.x, p.x);
    hi.z = std::max(hi.z, p.z);
  }

  double diagonal() const { return (hi - lo).norm(); }
  double area() const { return (hi.x - lo.x) * (hi.z - lo.z); }
};

inline BoundingBox ring_bounds(const Ring& r) {
  BoundingBox b;
  for (const Vec2& p : r) b.expand(p);
  return b;
}

// Even-odd crossing test. Points exactly on the boundary are not
// guaranteed either way; callers needing clearance use edge distances.
inline bool point_in_ring(const Ring& r, const Vec2& p) {
  bool inside = false;
  const std::size_t n = r.size();
  for (std::size_t i = 0, j = n - 1; i < n; j = i++) {
    const Vec2& a = r[i];
    const Vec2& b = r[j];
    if ((a.z > p.z) != (b.z > p.z)) {
      const double x_cross = a.x + (p.z - a.z) / (b.z - a.z) * (b.x - a.x);
      if (p.x < x_cross) inside = !inside;
    }
  }
  return inside;
}

inline double point_segment_distance(const Vec2& p, const Vec2& a, const Vec2& b) {
  const Vec2 ab = b - a;
  const double len2 = ab.squared_norm();
  if (len2 == 0.0) return (p - a).norm();
  const double t = std::clamp((p - a).dot(ab) / len2, 0.0, 1.0);
  return (p - (a + ab * t)).norm();
}

inline double point_ring_distance(const Ring& r, const Vec2& p) {
  double d = std::numeric_limits<double>::max();
  const std::size_t n = r.size();
  for (std::size_t i = 0; i < n; ++i) {
    d = std::min(d, point_segment_distance(p, r[i], r[(i + 1) % n]));
  }
  return d;
}

// Proper intersection of segments [p1,p2] and [q1,q2]. Returns the pair of
// line parameters (s along p, t along q), both in [0,1], when the segments
// cross; nullopt for parallel/collinear configurations.
inline std::optional<std::pair<double, double>> segment_intersection(
    const Vec2& p1, const Vec2& p2, const Vec2& q1, const Vec2& q2) {
  const Vec2 dp = p2 - p1;
  const Vec2 dq = q2 - q1;
  const double denom = dp.cross(dq);
  if (denom == 0.0) return std::nullopt;
  const Vec2 w = q1 - p1;
  const double s = w.cross(dq) / denom;
  const double t = w.cross(dp) / denom;
  if (s < 0.0 || s > 1.0 || t < 0.0 || t > 1.0) return std::nullopt;
  return std::make_pair(s, t);
}

// O(n^2) simplicity check: no two non-adjacent edges may intersect and
// adjacent edges may only meet at their shared vertex.
inline bool ring_is_simple(const Ring& r) {
  const std::size_t n = r.size();
  if (n < 3) return false;
  for (std::size_t i = 0; i < n; ++i) {
    const Vec2& a1 = r[i];
    const Vec2& a2 = r[(i + 1) % n];
    if (a1 == a2) return false;
    for (std::size_t j = i + 1; j < n; ++j) {
      const bool adjacent = (j == i + 1) || (i == 0 && j == n - 1);
      const Vec2& b1 = r[j];
      const Vec2& b2 = r[(j + 1) % n];
      const auto hit = segment_intersection(a1, a2, b1, b2);
      if (!hit) continue;
      if (adjacent) {
        // Shared endpoint shows up as a parameter at 0 or 1; anything in
        // the open interval is a genuine crossing.
        const auto [s, t] = *hit;
        const double eps = 1e-12;
        if (s > eps && s < 1.0 - eps && t > eps && t < 1.0 - eps) return false;
      } else {
        return false;
      }
    }
  }
  return true;
}

// Drop duplicate vertices, then vertices collinear with their neighbours.
inline Ring merge_degenerate_vertices(const Ring& r, double tol = 1e-9) {
  Ring dedup;
  for (const Vec2& p : r) {
    if (dedup.empty() || (p - dedup.back()).norm() > tol) dedup.push_back(p);
  }
  while (dedup.size() > 1 && (dedup.back() - dedup.front()).norm() <= tol) dedup.pop_back();

  Ring out;
  const std::size_t n = dedup.size();
  for (std::size_t i = 0; i < n; ++i) {
    const Vec2 e1 = dedup[i] - dedup[(i + n - 1) % n];
    const Vec2 e2 = dedup[(i + 1) % n] - dedup[i];
    const double cross = e1.cross(e2);
    if (std::abs(cross) <= tol * (e1.norm() * e2.norm() + tol)) continue;
    out.push_back(dedup[i]);
  }
  return out;
}

namespace detail {

using BoostPoint = boost::geometry::model::d2::point_xy<double>;
// Counter-clockwise, open rings to match Ring's storage.
using BoostPolygon = boost::geometry::model::polygon<BoostPoint, false, false>;
using BoostMultiPolygon = boost::geometry::model::multi_polygon<BoostPolygon>;

inline BoostMultiPolygon to_boost(const Footprint& f) {
  BoostMultiPolygon mp;
  for (const PolygonWithHoles& part : f.parts) {
    BoostPolygon poly;
    for (const Vec2& p : part.outer) poly.outer().emplace_back(p.x, p.z);
    for (const Ring& hole : part.holes) {
      poly.inners().emplace_back();
      for (const Vec2& p : hole) poly.inners().back().emplace_back(p.x, p.z);
    }
    boost::geometry::correct(poly);
    mp.push_back(std::move(poly));
  }
  return mp;
}

inline Footprint from_boost(const BoostMultiPolygon& mp) {
  Footprint f;
  for (const BoostPolygon& poly : mp) {
    PolygonWithHoles part;
    for (const BoostPoint& p : poly.outer()) part.outer.emplace_back(p.x(), p.y());
    // correct() may have closed the ring; drop a repeated end vertex.
    if (part.outer.size() > 1 && part.outer.front() == part.outer.back()) {
      part.outer.pop_back();
    }
    for (const auto& inner : poly.inners()) {
      Ring hole;
      for (const BoostPoint& p : inner) hole.emplace_back(p.x(), p.y());
      if (hole.size() > 1 && hole.front() == hole.back()) hole.pop_back();
      if (hole.size() >= 3) part.holes.push_back(std::move(hole));
    }
    if (part.outer.size() >= 3) f.parts.push_back(std::move(part));
  }
  return f;
}

}  // namespace detail

inline Footprint footprint_from_ring(Ring outer) {
  if (!ring_is_ccw(outer)) std::reverse(outer.begin(), outer.end());
  Footprint f;
  f.parts.push_back(PolygonWithHoles{std::move(outer), {}});
  return f;
}

inline double footprint_area(const Footprint& f) {
  double a = 0.0;
  for (const PolygonWithHoles& part : f.parts) {
    a += ring_area(part.outer);
    for (const Ring& hole : part.holes) a -= ring_area(hole);
  }
  return a;
}

inline bool footprint_contains(const Footprint& f, const Vec2& p) {
  for (const PolygonWithHoles& part : f.parts) {
    if (!point_in_ring(part.outer, p)) continue;
    bool in_hole = false;
    for (const Ring& hole : part.holes) {
      if (point_in_ring(hole, p)) {
        in_hole = true;
        break;
      }
    }
    if (!in_hole) return true;
  }
  return false;
}

namespace detail {

// Quantize all coordinates to a common grid. Overlays of nearly
// coincident edges are the one configuration the floating-point overlay
// mishandles; snapping both operands makes such edges exactly coincident,
// which it resolves reliably. The geometric perturbation is bounded by
// q/sqrt(2) per vertex.
inline Footprint snapped(const Footprint& f, double q) {
  Footprint out = f;
  auto snap = [q](Vec2& p) {
    p = Vec2{std::round(p.x / q) * q, std::round(p.z / q) * q};
  };
  for (PolygonWithHoles& part : out.parts) {
    for (Vec2& p : part.outer) snap(p);
    for (Ring& hole : part.holes) {
      for (Vec2& p : hole) snap(p);
    }
  }
  return out;
}

inline double footprint_perimeter(const Footprint& f) {
  double sum = 0.0;
  for (const PolygonWithHoles& part : f.parts) {
    const std::size_t n = part.outer.size();
    for (std::size_t i = 0; i < n; ++i) {
      sum += (part.outer[(i + 1) % n] - part.outer[i]).norm();
    }
  }
  return sum;
}

inline Footprint raw_union(const Footprint& a, const Footprint& b) {
  try {
    BoostMultiPolygon out;
    boost::geometry::union_(to_boost(a), to_boost(b), out);
    return from_boost(out);
  } catch (const std::exception& e) {
    throw Error(ErrorCode::kClippingFailure, e.what());
  }
}

inline Footprint raw_intersection(const Footprint& a, const Footprint& b) {
  try {
    BoostMultiPolygon out;
    boost::geometry::intersection(to_boost(a), to_boost(b), out);
    return from_boost(out);
  } catch (const std::exception& e) {
    throw Error(ErrorCode::kClippingFailure, e.what());
  }
}

}  // namespace detail

inline BoundingBox footprint_bounds(const Footprint& f) {
  BoundingBox b;
  for (const PolygonWithHoles& part : f.parts) {
    for (const Vec2& p : part.outer) b.expand(p);
  }
  return b;
}

namespace detail {

inline double overlay_scale(const Footprint& a, const Footprint& b) {
  BoundingBox box = footprint_bounds(a);
  for (const PolygonWithHoles& part : b.parts) {
    for (const Vec2& p : part.outer) box.expand(p);
  }
  return std::max(box.diagonal(), 1.0);
}

}  // namespace detail

// Boolean union. The result is sanity-checked against the operand areas;
// a degenerate overlay is redone with both operands snapped to a
// progressively coarser grid (starting around 1e-12 of the extent).
inline Footprint footprint_union(const Footprint& a, const Footprint& b) {
  const double scale = detail::overlay_scale(a, b);
  const double tol = 1e-9 * std::max(footprint_area(a) + footprint_area(b), 1.0);
  for (int stage = 0; stage <= 3; ++stage) {
    const double q = stage == 0 ? 0.0 : scale * 1e-12 * std::pow(100.0, stage - 1);
    const Footprint sa = stage == 0 ? a : detail::snapped(a, q);
    const Footprint sb = stage == 0 ? b : detail::snapped(b, q);
    const double area_a = footprint_area(sa);
    const double area_b = footprint_area(sb);
    Footprint u = detail::raw_union(sa, sb);
    const double area_u = footprint_area(u);
    const double slack =
        tol + 4.0 * q * (detail::footprint_perimeter(sa) + detail::footprint_perimeter(sb));
    if (area_u >= std::max(area_a, area_b) - slack && area_u <= area_a + area_b + slack) {
      return u;
    }
  }
  throw Error(ErrorCode::kClippingFailure, "union failed validation at every snap level");
}

inline Footprint footprint_intersection(const Footprint& a, const Footprint& b) {
  return detail::raw_intersection(a, b);
}

// Robust area of the overlap region: the direct intersection is accepted
// only when it matches the inclusion-exclusion identity through the union
// and respects the operand-area bounds; degenerate overlays are retried
// on the snap grid.
inline double footprint_overlap_area(const Footprint& a, const Footprint& b) {
  const double scale = detail::overlay_scale(a, b);
  const double tol = 1e-9 * std::max(footprint_area(a) + footprint_area(b), 1.0);
  for (int stage = 0; stage <= 3; ++stage) {
    const double q = stage == 0 ? 0.0 : scale * 1e-12 * std::pow(100.0, stage - 1);
    const Footprint sa = stage == 0 ? a : detail::snapped(a, q);
    const Footprint sb = stage == 0 ? b : detail::snapped(b, q);
    const double area_a = footprint_area(sa);
    const double area_b = footprint_area(sb);
    const double inter = footprint_area(detail::raw_intersection(sa, sb));
    const double uni = footprint_area(detail::raw_union(sa, sb));
    const double by_identity = area_a + area_b - uni;
    const double slack =
        tol + 4.0 * q * (detail::footprint_perimeter(sa) + detail::footprint_perimeter(sb));
    if (std::abs(inter - by_identity) <= slack && inter <= std::min(area_a, area_b) + slack &&
        uni >= std::max(area_a, area_b) - slack) {
      return inter;
    }
  }
  throw Error(ErrorCode::kClippingFailure, "overlap area failed validation at every snap level");
}

}  // namespace panoreg
