#pragma once

#include <cmath>

namespace panoreg {

// 2D point/vector on the XZ floor plane (y is the up axis everywhere in
// this library, so planar quantities carry x and z components).
struct Vec2 {
  double x = 0.0;
  double z = 0.0;

  constexpr Vec2() = default;
  constexpr Vec2(double x_, double z_) : x(x_), z(z_) {}

  constexpr Vec2 operator+(const Vec2& o) const { return {x + o.x, z + o.z}; }
  constexpr Vec2 operator-(const Vec2& o) const { return {x - o.x, z - o.z}; }
  constexpr Vec2 operator*(double s) const { return {x * s, z * s}; }
  constexpr Vec2 operator/(double s) const { return {x / s, z / s}; }
  constexpr Vec2 operator-() const { return {-x, -z}; }
  constexpr bool operator==(const Vec2& o) const = default;

  constexpr double dot(const Vec2& o) const { return x * o.x + z * o.z; }
  // Scalar 2D cross product: x*o.z - z*o.x.
  constexpr double cross(const Vec2& o) const { return x * o.z - z * o.x; }
  double norm() const { return std::hypot(x, z); }
  constexpr double squared_norm() const { return x * x + z * z; }
};

constexpr Vec2 operator*(double s, const Vec2& v) { return v * s; }

struct Vec3 {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;

  constexpr bool operator==(const Vec3& o) const = default;
  double norm() const { return std::sqrt(x * x + y * y + z * z); }
};

}  // namespace panoreg
