#pragma once

#include <cmath>
#include <numbers>

#include "panoreg/vec.hpp"

namespace panoreg {

// Wrap angle to (-pi, pi].
inline double wrap_angle(double a) {
  const double two_pi = 2.0 * std::numbers::pi;
  double w = a - std::floor(a / two_pi) * two_pi;  // [0, 2*pi)
  if (w > std::numbers::pi) w -= two_pi;
  return w;
}

inline double degrees(double radians) { return radians * (180.0 / std::numbers::pi); }
inline double radians(double deg) { return deg * (std::numbers::pi / 180.0); }

// 3-DoF rigid transform on the XZ plane: rotation about the vertical axis
// plus a 2D translation. Maps pano-2 frame coordinates into the pano-1
// frame: p1 = R(theta) * p2 + t, with
//   R(theta) = [cos -sin; sin cos] acting on (x, z).
struct PlanarPose {
  double theta = 0.0;  // radians, (-pi, pi]
  Vec2 t;

  PlanarPose() = default;
  PlanarPose(double theta_, Vec2 t_) : theta(wrap_angle(theta_)), t(t_) {}

  Vec2 rotate(const Vec2& p) const {
    const double c = std::cos(theta), s = std::sin(theta);
    return {c * p.x - s * p.z, s * p.x + c * p.z};
  }

  Vec2 apply(const Vec2& p) const { return rotate(p) + t; }

  // this ∘ other: first apply other, then this.
  PlanarPose compose(const PlanarPose& other) const {
    return PlanarPose(theta + other.theta, rotate(other.t) + t);
  }

  PlanarPose inverse() const {
    PlanarPose inv(-theta, Vec2{});
    inv.t = -inv.rotate(t);
    return inv;
  }

  static PlanarPose identity() { return PlanarPose(); }
};

}  // namespace panoreg
