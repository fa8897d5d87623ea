#pragma once

#include "deformkit/quaternion.hpp"
#include "deformkit/types.hpp"

namespace deformkit {

/// Rotation + translation as an orthonormal 3x3 matrix and a 3-vector.
struct RigidTransform {
  Mat3 rotation = Mat3::Identity();
  Vec3 translation = Vec3::Zero();

  static RigidTransform identity() { return {}; }

  Vec3 apply(const Vec3& p) const { return rotation * p + translation; }

  RigidTransform inverse() const {
    RigidTransform inv;
    inv.rotation = rotation.transpose();
    inv.translation = -(rotation.transpose() * translation);
    return inv;
  }

  /// Composition: (a * b)(p) == a(b(p)).
  RigidTransform operator*(const RigidTransform& o) const {
    RigidTransform r;
    r.rotation = rotation * o.rotation;
    r.translation = rotation * o.translation + translation;
    return r;
  }

  bool is_orthonormal(double tol = 1e-9) const {
    const Mat3 err = rotation.transpose() * rotation - Mat3::Identity();
    return err.cwiseAbs().maxCoeff() <= tol && rotation.determinant() > 0.0;
  }
};

/// 8-scalar rigid transform: real part encodes the rotation, dual part the
/// translation. A unit dual quaternion has |real| = 1 and dot(real, dual) = 0.
struct DualQuaternion {
  Quaternion real = Quaternion::identity();
  Quaternion dual = Quaternion{0.0, 0.0, 0.0, 0.0};

  DualQuaternion() = default;
  DualQuaternion(const Quaternion& r, const Quaternion& d) : real(r), dual(d) {}

  static DualQuaternion identity() { return {}; }

  DualQuaternion operator+(const DualQuaternion& o) const {
    return {real + o.real, dual + o.dual};
  }
  DualQuaternion operator*(double s) const { return {real * s, dual * s}; }
  DualQuaternion operator-() const { return {-real, -dual}; }

  bool is_unit(double tol = 1e-9) const {
    return std::abs(real.norm() - 1.0) <= tol && std::abs(real.dot(dual)) <= tol;
  }

  /// Full dual-number normalization. Unlike dividing both parts by |real|,
  /// this also removes the component of the dual part along the real part,
  /// so the result satisfies both unit constraints exactly and its point
  /// action is rigid.
  DualQuaternion normalized() const {
    const double n = real.norm();
    if (n < 1e-12) throw NumericalError("degenerate dual quaternion: real part has near-zero norm");
    const double inv = 1.0 / n;
    const Quaternion r = real * inv;
    const Quaternion d = (dual - real * (real.dot(dual) / (n * n))) * inv;
    return {r, d};
  }

  /// Inverse of a unit dual quaternion: quaternion-conjugate both parts.
  DualQuaternion inverse() const {
    return {real.conjugate(), dual.conjugate()};
  }

  /// Dual quaternion product; composes rigid motions so that
  /// (a * b)(p) == a(b(p)).
  DualQuaternion operator*(const DualQuaternion& o) const {
    return {quat_mul(real, o.real), quat_mul(real, o.dual) + quat_mul(dual, o.real)};
  }

  Vec3 translation() const {
    const Quaternion t = quat_mul(dual, real.conjugate());
    return 2.0 * t.vec();
  }

  /// Apply to a point. Non-unit input is normalized first.
  Vec3 apply(const Vec3& p) const {
    if (!is_unit(1e-12)) return normalized().apply(p);
    return quat_rotate(real, p) + translation();
  }
};

/// Dual quaternion from the 7-scalar pose record: translation (t1,t2,t3)
/// plus a rotation quaternion. The rotation is normalized, then
/// dual = 1/2 [0,t] ⊗ real.
inline DualQuaternion dq_from_pose7(double t1, double t2, double t3, const Quaternion& qr) {
  if (qr.norm() < 1e-12) throw ValidationError("pose rotation quaternion is zero");
  const Quaternion r = qr.normalized();
  const Quaternion d = quat_mul(Quaternion::pure({t1, t2, t3}), r) * 0.5;
  return {r, d};
}

inline DualQuaternion dq_from_rotation_translation(const Quaternion& qr, const Vec3& t) {
  return dq_from_pose7(t.x(), t.y(), t.z(), qr);
}

inline RigidTransform dq_to_rigid(const DualQuaternion& dq) {
  const DualQuaternion u = dq.is_unit(1e-12) ? dq : dq.normalized();
  RigidTransform rt;
  rt.rotation = quat_to_matrix(u.real);
  rt.translation = u.translation();
  return rt;
}

/// Sign-canonicalized (real.w >= 0) dual quaternion from a rigid transform.
inline DualQuaternion rigid_to_dq(const RigidTransform& rt) {
  if (!rt.is_orthonormal(1e-9))
    throw ValidationError("rigid transform rotation is not orthonormal with det +1");
  const Quaternion r = quat_canonical(quat_from_matrix(rt.rotation));
  return dq_from_rotation_translation(r, rt.translation);
}

}  // namespace deformkit
