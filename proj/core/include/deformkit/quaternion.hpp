#pragma once

#include <cmath>

#include "deformkit/types.hpp"

namespace deformkit {

/// Quaternion in scalar-first (w, x, y, z) layout. The same convention is
/// used in every file format; see the serialization docs in the README.
struct Quaternion {
  double w = 1.0;
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;

  Quaternion() = default;
  Quaternion(double w_, double x_, double y_, double z_) : w(w_), x(x_), y(y_), z(z_) {}

  static Quaternion identity() { return {1.0, 0.0, 0.0, 0.0}; }

  /// Pure quaternion [0, v].
  static Quaternion pure(const Vec3& v) { return {0.0, v.x(), v.y(), v.z()}; }

  static Quaternion from_axis_angle(const Vec3& axis, double angle_rad) {
    const double n = axis.norm();
    if (n == 0.0) return identity();
    const double half = 0.5 * angle_rad;
    const double s = std::sin(half) / n;
    return {std::cos(half), axis.x() * s, axis.y() * s, axis.z() * s};
  }

  Vec3 vec() const { return {x, y, z}; }

  double norm2() const { return w * w + x * x + y * y + z * z; }
  double norm() const { return std::sqrt(norm2()); }
  double dot(const Quaternion& o) const { return w * o.w + x * o.x + y * o.y + z * o.z; }

  Quaternion conjugate() const { return {w, -x, -y, -z}; }

  Quaternion operator+(const Quaternion& o) const { return {w + o.w, x + o.x, y + o.y, z + o.z}; }
  Quaternion operator-(const Quaternion& o) const { return {w - o.w, x - o.x, y - o.y, z - o.z}; }
  Quaternion operator*(double s) const { return {w * s, x * s, y * s, z * s}; }
  Quaternion operator-() const { return {-w, -x, -y, -z}; }

  Quaternion normalized() const {
    const double n = norm();
    if (n < 1e-300) throw ValidationError("cannot normalize zero quaternion");
    return *this * (1.0 / n);
  }

  bool is_unit(double tol = 1e-9) const { return std::abs(norm() - 1.0) <= tol; }
};

inline Quaternion operator*(double s, const Quaternion& q) { return q * s; }

/// Hamilton product a ⊗ b.
inline Quaternion quat_mul(const Quaternion& a, const Quaternion& b) {
  return {a.w * b.w - a.x * b.x - a.y * b.y - a.z * b.z,
          a.w * b.x + a.x * b.w + a.y * b.z - a.z * b.y,
          a.w * b.y - a.x * b.z + a.y * b.w + a.z * b.x,
          a.w * b.z + a.x * b.y - a.y * b.x + a.z * b.w};
}

/// Rotate p by the unit quaternion q via conjugation q [0,p] q*.
inline Vec3 quat_rotate(const Quaternion& q, const Vec3& p) {
  // Expanded form: p + 2 w (v × p) + 2 v × (v × p).
  const Vec3 v = q.vec();
  const Vec3 t = 2.0 * v.cross(p);
  return p + q.w * t + v.cross(t);
}

inline Mat3 quat_to_matrix(const Quaternion& q) {
  const double w = q.w, x = q.x, y = q.y, z = q.z;
  Mat3 m;
  m << 1 - 2 * (y * y + z * z), 2 * (x * y - w * z), 2 * (x * z + w * y),
       2 * (x * y + w * z), 1 - 2 * (x * x + z * z), 2 * (y * z - w * x),
       2 * (x * z - w * y), 2 * (y * z + w * x), 1 - 2 * (x * x + y * y);
  return m;
}

/// Shepperd's method: pick the largest diagonal branch for stability.
inline Quaternion quat_from_matrix(const Mat3& m) {
  Quaternion q;
  const double tr = m.trace();
  if (tr > 0.0) {
    double s = std::sqrt(tr + 1.0) * 2.0;
    q = {0.25 * s, (m(2, 1) - m(1, 2)) / s, (m(0, 2) - m(2, 0)) / s, (m(1, 0) - m(0, 1)) / s};
  } else if (m(0, 0) > m(1, 1) && m(0, 0) > m(2, 2)) {
    double s = std::sqrt(1.0 + m(0, 0) - m(1, 1) - m(2, 2)) * 2.0;
    q = {(m(2, 1) - m(1, 2)) / s, 0.25 * s, (m(0, 1) + m(1, 0)) / s, (m(0, 2) + m(2, 0)) / s};
  } else if (m(1, 1) > m(2, 2)) {
    double s = std::sqrt(1.0 + m(1, 1) - m(0, 0) - m(2, 2)) * 2.0;
    q = {(m(0, 2) - m(2, 0)) / s, (m(0, 1) + m(1, 0)) / s, 0.25 * s, (m(1, 2) + m(2, 1)) / s};
  } else {
    double s = std::sqrt(1.0 + m(2, 2) - m(0, 0) - m(1, 1)) * 2.0;
    q = {(m(1, 0) - m(0, 1)) / s, (m(0, 2) + m(2, 0)) / s, (m(1, 2) + m(2, 1)) / s, 0.25 * s};
  }
  return q.normalized();
}

/// Canonical sign: w > 0, with ties broken on the first nonzero vector
/// component. Keeps serialization of equivalent rotations stable.
inline Quaternion quat_canonical(const Quaternion& q) {
  if (q.w > 0.0) return q;
  if (q.w < 0.0) return -q;
  if (q.x != 0.0) return q.x > 0.0 ? q : -q;
  if (q.y != 0.0) return q.y > 0.0 ? q : -q;
  return q.z >= 0.0 ? q : -q;
}

/// Geodesic angle (radians) between the rotations of two unit quaternions.
/// Computed from the shorter chord rather than acos of the dot product; the
/// chord form keeps full precision near zero, and its argument never exceeds
/// sqrt(2)/2, so asin stays well conditioned everywhere.
inline double quat_geodesic_angle(const Quaternion& a, const Quaternion& b) {
  const double chord = std::min((a - b).norm(), (a + b).norm());
  return 4.0 * std::asin(std::min(1.0, 0.5 * chord));
}

}  // namespace deformkit
