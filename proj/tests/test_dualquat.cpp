#include <doctest.h>

#include "deformkit/dualquat.hpp"
#include "oracles.hpp"

using namespace deformkit;

namespace {

DualQuaternion random_unit_dq(oracles::Rng& rng) {
  const Eigen::Vector4d q4 = rng.quat4();
  return dq_from_rotation_translation(Quaternion{q4[0], q4[1], q4[2], q4[3]},
                                      rng.vec3(-2.0, 2.0));
}

}  // namespace

TEST_CASE("7-scalar pose acts as rotate-then-translate") {
  oracles::Rng rng(21);
  for (int i = 0; i < 200; ++i) {
    const Eigen::Vector4d q4 = rng.quat4();
    const Vec3 t = rng.vec3(-3.0, 3.0);
    const DualQuaternion dq = dq_from_pose7(t.x(), t.y(), t.z(),
                                            Quaternion{q4[0], q4[1], q4[2], q4[3]});
    const Eigen::Matrix3d R = oracles::rotation_matrix(q4[0], q4[1], q4[2], q4[3]);
    const Vec3 p = rng.vec3(-2.0, 2.0);
    CHECK((dq.apply(p) - (R * p + t)).norm() <= 1e-12);
    CHECK(dq.is_unit(1e-12));
  }
}

TEST_CASE("translation extraction inverts construction") {
  oracles::Rng rng(22);
  for (int i = 0; i < 100; ++i) {
    const Vec3 t = rng.vec3(-5.0, 5.0);
    const Eigen::Vector4d q4 = rng.quat4();
    const DualQuaternion dq =
        dq_from_rotation_translation(Quaternion{q4[0], q4[1], q4[2], q4[3]}, t);
    CHECK((dq.translation() - t).norm() <= 1e-12);
  }
}

TEST_CASE("product composes point actions") {
  oracles::Rng rng(23);
  for (int i = 0; i < 100; ++i) {
    const DualQuaternion a = random_unit_dq(rng), b = random_unit_dq(rng);
    const Vec3 p = rng.vec3(-2.0, 2.0);
    CHECK(((a * b).apply(p) - a.apply(b.apply(p))).norm() <= 1e-12);
  }
}

TEST_CASE("inverse undoes a unit dual quaternion") {
  oracles::Rng rng(24);
  for (int i = 0; i < 100; ++i) {
    const DualQuaternion dq = random_unit_dq(rng);
    const DualQuaternion id = dq * dq.inverse();
    CHECK(std::abs(std::abs(id.real.w) - 1.0) <= 1e-12);
    CHECK(id.real.vec().norm() <= 1e-12);
    CHECK(id.dual.norm() <= 1e-12);
    const Vec3 p = rng.vec3(-2.0, 2.0);
    CHECK((dq.inverse().apply(dq.apply(p)) - p).norm() <= 1e-12);
  }
}

TEST_CASE("full normalization restores both unit constraints") {
  oracles::Rng rng(25);
  for (int i = 0; i < 100; ++i) {
    DualQuaternion dq = random_unit_dq(rng);
    dq.real = dq.real * 1.7;
    dq.dual = dq.dual + dq.real * 0.3;  // inject a component along the real part
    const DualQuaternion n = dq.normalized();
    CHECK(std::abs(n.real.norm() - 1.0) <= 1e-12);
    CHECK(std::abs(n.real.dot(n.dual)) <= 1e-12);
  }
}

TEST_CASE("normalized action is rigid") {
  oracles::Rng rng(26);
  for (int i = 0; i < 100; ++i) {
    DualQuaternion dq = random_unit_dq(rng);
    dq.real = dq.real * rng.range(0.2, 3.0);
    dq.dual = dq.dual + dq.real * rng.range(-0.5, 0.5);
    const DualQuaternion n = dq.normalized();
    const Vec3 p = rng.vec3(-2.0, 2.0), q = rng.vec3(-2.0, 2.0);
    CHECK(std::abs((n.apply(p) - n.apply(q)).norm() - (p - q).norm()) <= 1e-12);
  }
}

TEST_CASE("rigid transform round trip") {
  oracles::Rng rng(27);
  for (int i = 0; i < 100; ++i) {
    const DualQuaternion dq = random_unit_dq(rng);
    const RigidTransform rt = dq_to_rigid(dq);
    CHECK(rt.is_orthonormal(1e-12));
    const DualQuaternion back = rigid_to_dq(rt);
    const Vec3 p = rng.vec3(-2.0, 2.0);
    CHECK((back.apply(p) - dq.apply(p)).norm() <= 1e-9);
    CHECK(back.real.w >= 0.0);
  }
}

TEST_CASE("degenerate inputs are rejected") {
  CHECK_THROWS_AS(dq_from_pose7(0.0, 0.0, 0.0, Quaternion{0.0, 0.0, 0.0, 0.0}),
                  ValidationError);
  DualQuaternion zero;
  zero.real = Quaternion{0.0, 0.0, 0.0, 0.0};
  CHECK_THROWS_AS(zero.normalized(), NumericalError);
  RigidTransform skew;
  skew.rotation(0, 1) = 0.5;
  CHECK_THROWS_AS(rigid_to_dq(skew), ValidationError);
}

TEST_CASE("rigid transform algebra") {
  oracles::Rng rng(28);
  for (int i = 0; i < 50; ++i) {
    const RigidTransform a = dq_to_rigid(random_unit_dq(rng));
    const RigidTransform b = dq_to_rigid(random_unit_dq(rng));
    const Vec3 p = rng.vec3(-2.0, 2.0);
    CHECK(((a * b).apply(p) - a.apply(b.apply(p))).norm() <= 1e-12);
    CHECK((a.inverse().apply(a.apply(p)) - p).norm() <= 1e-12);
  }
}
