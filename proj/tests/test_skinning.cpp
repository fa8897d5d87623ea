#include <doctest.h>

#include "deformkit/skinning.hpp"
#include "oracles.hpp"

using namespace deformkit;

namespace {

DualQuaternion random_unit_dq(oracles::Rng& rng) {
  const Eigen::Vector4d q4 = rng.quat4();
  return dq_from_rotation_translation(Quaternion{q4[0], q4[1], q4[2], q4[3]},
                                      rng.vec3(-1.5, 1.5));
}

VecX random_simplex(oracles::Rng& rng, int n) {
  VecX w(n);
  double total = 0.0;
  for (int i = 0; i < n; ++i) {
    w[i] = rng.range(0.01, 1.0);
    total += w[i];
  }
  return w / total;
}

}  // namespace

TEST_CASE("single-joint blends reproduce the joint motion exactly") {
  oracles::Rng rng(41);
  for (int i = 0; i < 50; ++i) {
    const DualQuaternion dq = random_unit_dq(rng);
    VecX w(1);
    w[0] = 1.0;
    const Vec3 p = rng.vec3(-2.0, 2.0);
    CHECK((dbs_blend(w, {dq}).apply(p) - dq.apply(p)).norm() <= 1e-12);
    CHECK((lbs_blend(w, {dq_to_rigid(dq)}).apply(p) - dq.apply(p)).norm() <= 1e-12);
  }
}

TEST_CASE("matrix blend averages translations linearly") {
  VecX w(2);
  w << 0.5, 0.5;
  RigidTransform a, b;
  a.translation = Vec3(2.0, 0.0, 0.0);
  b.translation = Vec3(0.0, 4.0, 0.0);
  const Vec3 out = lbs_blend(w, {a, b}).apply(Vec3::Zero());
  CHECK((out - Vec3(1.0, 2.0, 0.0)).norm() <= 1e-15);
}

TEST_CASE("quaternion blend of rotations stays rigid where matrices shrink") {
  VecX w(2);
  w << 0.5, 0.5;
  const DualQuaternion id = DualQuaternion::identity();
  const DualQuaternion half_turn =
      dq_from_rotation_translation(Quaternion::from_axis_angle(Vec3::UnitZ(), M_PI), Vec3::Zero());
  const Vec3 p(1.0, 0.0, 0.0);
  // the matrix average of identity and a half turn collapses x to zero
  const Vec3 collapsed = lbs_blend(w, {dq_to_rigid(id), dq_to_rigid(half_turn)}).apply(p);
  CHECK(collapsed.norm() <= 1e-12);
  // the normalized quaternion blend keeps the point on the unit circle
  const Vec3 kept = dbs_blend(w, {id, half_turn}).apply(p);
  CHECK(kept.norm() == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("blend is invariant to the sign of each input") {
  oracles::Rng rng(42);
  for (int i = 0; i < 100; ++i) {
    std::vector<DualQuaternion> dqs{random_unit_dq(rng), random_unit_dq(rng),
                                    random_unit_dq(rng)};
    const VecX w = random_simplex(rng, 3);
    const Vec3 p = rng.vec3(-2.0, 2.0);
    const Vec3 base = dbs_blend(w, dqs).apply(p);
    dqs[1] = -dqs[1];
    dqs[2] = -dqs[2];
    CHECK((dbs_blend(w, dqs).apply(p) - base).norm() <= 1e-12);
  }
}

TEST_CASE("blended inverse equals inverse of the blend") {
  oracles::Rng rng(43);
  for (int i = 0; i < 200; ++i) {
    const std::vector<DualQuaternion> dqs{random_unit_dq(rng), random_unit_dq(rng),
                                          random_unit_dq(rng), random_unit_dq(rng)};
    const VecX w = random_simplex(rng, 4);
    const DualQuaternion fwd = dbs_blend(w, dqs, false);
    const DualQuaternion inv = dbs_blend(w, dqs, true);
    const Vec3 p = rng.vec3(-2.0, 2.0);
    CHECK((inv.apply(fwd.apply(p)) - p).norm() <= 1e-12);
  }
}

TEST_CASE("degenerate weight input is rejected") {
  const std::vector<DualQuaternion> dqs{DualQuaternion::identity(), DualQuaternion::identity()};
  VecX zero = VecX::Zero(2);
  CHECK_THROWS_AS(dbs_blend(zero, dqs), NumericalError);
  VecX mismatched = VecX::Ones(3) / 3.0;
  CHECK_THROWS_AS(dbs_blend(mismatched, dqs), ValidationError);
}

TEST_CASE("collapse fixture geometry") {
  const Mesh cyl = make_collapse_cylinder();
  CHECK(!cyl.empty());
  // closed 32-gon prism of height 2: volume = 2 * 16 * sin(pi/16)
  const double expected = 2.0 * 16.0 * std::sin(M_PI / 16.0);
  CHECK(mesh_volume(cyl) == doctest::Approx(expected).epsilon(1e-9));
  // a ring sits exactly at z = 0
  int mid_count = 0;
  for (const Vec3& v : cyl.vertices) mid_count += v.z() == 0.0 ? 1 : 0;
  CHECK(mid_count >= 32);
}

TEST_CASE("collapse weights interpolate linearly in height") {
  const VecX bottom = collapse_weights(Vec3(1.0, 0.0, -1.0));
  const VecX mid = collapse_weights(Vec3(1.0, 0.0, 0.0));
  const VecX top = collapse_weights(Vec3(1.0, 0.0, 1.0));
  CHECK(bottom[0] == doctest::Approx(1.0));
  CHECK(top[1] == doctest::Approx(1.0));
  CHECK(mid[0] == doctest::Approx(0.5));
  CHECK(mid[1] == doctest::Approx(0.5));
}

TEST_CASE("twist sweep: matrix skinning pinches, quaternion skinning does not") {
  const auto rows = collapse_report({0.0, 90.0, 180.0}, CollapseMode::Twist);
  CHECK(rows[0].lbs_mid_radius == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(rows[0].dbs_mid_radius == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(rows[1].lbs_mid_radius == doctest::Approx(std::sqrt(2.0) / 2.0).epsilon(1e-9));
  CHECK(rows[2].lbs_mid_radius <= 1e-9);
  CHECK(rows[2].dbs_mid_radius == doctest::Approx(1.0).epsilon(1e-6));
  // the pinch destroys volume; the rigid blend preserves it closely
  CHECK(rows[2].lbs_volume < 0.5 * rows[0].lbs_volume);
  CHECK(rows[2].dbs_volume > 0.95 * rows[0].dbs_volume);
}

TEST_CASE("bend sweep matches the half-angle radius law") {
  const auto rows = collapse_report({90.0}, CollapseMode::Bend);
  CHECK(rows[0].lbs_mid_radius == doctest::Approx(std::sqrt(2.0) / 2.0).epsilon(1e-6));
  CHECK(rows[0].dbs_mid_radius == doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("mesh skinning with identity pose is the identity") {
  const Mesh cyl = make_collapse_cylinder();
  const Rig rig = Rig::default_init(2, 11, 1.0);
  const std::vector<DualQuaternion> pose(2, DualQuaternion::identity());
  for (const SkinMethod m : {SkinMethod::Lbs, SkinMethod::Dbs}) {
    const Mesh out = skin_mesh(cyl, rig, pose, m);
    REQUIRE(out.vertices.size() == cyl.vertices.size());
    for (size_t i = 0; i < out.vertices.size(); ++i)
      CHECK((out.vertices[i] - cyl.vertices[i]).norm() <= 1e-12);
  }
}

TEST_CASE("mesh skinning validates pose length") {
  const Mesh cyl = make_collapse_cylinder();
  const Rig rig = Rig::default_init(2, 11, 1.0);
  const std::vector<DualQuaternion> wrong(3, DualQuaternion::identity());
  CHECK_THROWS_AS(skin_mesh(cyl, rig, wrong, SkinMethod::Dbs), ValidationError);
}

TEST_CASE("volume of a known tetrahedron") {
  Mesh tet;
  tet.vertices = {Vec3(0, 0, 0), Vec3(1, 0, 0), Vec3(0, 1, 0), Vec3(0, 0, 1)};
  tet.faces = {{0, 2, 1}, {0, 1, 3}, {0, 3, 2}, {1, 2, 3}};
  CHECK(mesh_volume(tet) == doctest::Approx(1.0 / 6.0).epsilon(1e-12));
}
