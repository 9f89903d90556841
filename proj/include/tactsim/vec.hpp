#pragma once

#include <array>
#include <cmath>
#include <iosfwd>

namespace tactsim {

struct Vec3 {
  double x = 0.0, y = 0.0, z = 0.0;

  constexpr Vec3() = default;
  constexpr Vec3(double x_, double y_, double z_) : x(x_), y(y_), z(z_) {}

  constexpr Vec3 operator+(const Vec3& o) const { return {x + o.x, y + o.y, z + o.z}; }
  constexpr Vec3 operator-(const Vec3& o) const { return {x - o.x, y - o.y, z - o.z}; }
  constexpr Vec3 operator*(double s) const { return {x * s, y * s, z * s}; }
  constexpr Vec3 operator/(double s) const { return {x / s, y / s, z / s}; }
  constexpr Vec3 operator-() const { return {-x, -y, -z}; }
  Vec3& operator+=(const Vec3& o) { x += o.x; y += o.y; z += o.z; return *this; }
  Vec3& operator-=(const Vec3& o) { x -= o.x; y -= o.y; z -= o.z; return *this; }
  Vec3& operator*=(double s) { x *= s; y *= s; z *= s; return *this; }

  constexpr double dot(const Vec3& o) const { return x * o.x + y * o.y + z * o.z; }
  constexpr Vec3 cross(const Vec3& o) const {
    return {y * o.z - z * o.y, z * o.x - x * o.z, x * o.y - y * o.x};
  }
  double norm() const { return std::sqrt(dot(*this)); }
  constexpr double norm2() const { return dot(*this); }
  Vec3 normalized() const {
    const double n = norm();
    return n > 0.0 ? *this / n : Vec3{0, 0, 0};
  }
};

inline constexpr Vec3 operator*(double s, const Vec3& v) { return v * s; }

// Column-major 3x3 rotation; columns are the frame axes.
struct Mat3 {
  std::array<Vec3, 3> col{};  // col[0]=x axis, col[1]=y axis, col[2]=z axis

  Vec3 operator*(const Vec3& v) const {
    return col[0] * v.x + col[1] * v.y + col[2] * v.z;
  }
  // R^T v: express a world vector in this frame.
  Vec3 transposed_mul(const Vec3& v) const {
    return {col[0].dot(v), col[1].dot(v), col[2].dot(v)};
  }
  double max_orthonormality_defect() const {
    double worst = 0.0;
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) {
        const double want = (i == j) ? 1.0 : 0.0;
        worst = std::max(worst, std::abs(col[i].dot(col[j]) - want));
      }
    return worst;
  }
  double det() const { return col[0].cross(col[1]).dot(col[2]); }
};

std::ostream& operator<<(std::ostream& os, const Vec3& v);

}  // namespace tactsim
