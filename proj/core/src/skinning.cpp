#include "deformkit/skinning.hpp"

#include <cmath>
#include <numbers>
#include <string>

namespace deformkit {

Affine lbs_blend(const VecX& weights, const std::vector<RigidTransform>& transforms) {
  if (weights.size() != static_cast<Eigen::Index>(transforms.size()))
    throw ValidationError("lbs_blend: weight count does not match transform count");
  Affine out;
  out.linear = Mat3::Zero();
  out.translation = Vec3::Zero();
  for (size_t j = 0; j < transforms.size(); ++j) {
    out.linear += weights[j] * transforms[j].rotation;
    out.translation += weights[j] * transforms[j].translation;
  }
  return out;
}

DualQuaternion dbs_blend(const VecX& weights, const std::vector<DualQuaternion>& dqs,
                         bool invert) {
  if (weights.size() != static_cast<Eigen::Index>(dqs.size()))
    throw ValidationError("dbs_blend: weight count does not match dual quaternion count");
  if (dqs.empty()) throw ValidationError("dbs_blend: empty input");

  int pivot = 0;
  weights.maxCoeff(&pivot);
  const Quaternion pivot_real = invert ? dqs[pivot].inverse().real : dqs[pivot].real;

  DualQuaternion sum{{0, 0, 0, 0}, {0, 0, 0, 0}};
  for (size_t j = 0; j < dqs.size(); ++j) {
    DualQuaternion dq = invert ? dqs[j].inverse() : dqs[j];
    if (dq.real.dot(pivot_real) < 0.0) dq = -dq;
    sum = sum + dq * weights[j];
  }
  if (sum.real.norm() < 1e-12)
    throw NumericalError("dbs_blend: degenerate blend (antipodal rotations with equal weights)");
  return sum.normalized();
}

Mesh skin_mesh(const Mesh& mesh, const Rig& rig, const std::vector<DualQuaternion>& pose,
               SkinMethod method) {
  if (mesh.vertices.empty()) throw ValidationError("skin_mesh: empty mesh");
  if (pose.size() != rig.joints.size())
    throw ValidationError("skin_mesh: pose length does not match rig joint count");

  std::vector<RigidTransform> rigid;
  if (method == SkinMethod::Lbs) {
    rigid.reserve(pose.size());
    for (const DualQuaternion& dq : pose) rigid.push_back(dq_to_rigid(dq));
  }

  Mesh out;
  out.faces = mesh.faces;
  out.vertices.resize(mesh.vertices.size());
  for (size_t v = 0; v < mesh.vertices.size(); ++v) {
    const VecX w = skin_weights(mesh.vertices[v], rig);
    if (method == SkinMethod::Lbs) {
      out.vertices[v] = lbs_blend(w, rigid).apply(mesh.vertices[v]);
    } else {
      try {
        out.vertices[v] = dbs_blend(w, pose).apply(mesh.vertices[v]);
      } catch (const NumericalError& e) {
        throw NumericalError(std::string(e.what()) + " at vertex " + std::to_string(v));
      }
    }
  }
  return out;
}

namespace {

constexpr int kSegments = 32;
constexpr int kRings = 65;  // odd ring count puts ring 32 exactly at z=0

}  // namespace

Mesh make_collapse_cylinder() {
  Mesh mesh;
  for (int r = 0; r < kRings; ++r) {
    const double z = -1.0 + 2.0 * r / (kRings - 1);
    for (int s = 0; s < kSegments; ++s) {
      const double phi = 2.0 * std::numbers::pi * s / kSegments;
      mesh.vertices.push_back({std::cos(phi), std::sin(phi), z});
    }
  }
  auto ring_vertex = [](int r, int s) { return r * kSegments + (s % kSegments); };
  for (int r = 0; r + 1 < kRings; ++r) {
    for (int s = 0; s < kSegments; ++s) {
      const int a = ring_vertex(r, s), b = ring_vertex(r, s + 1);
      const int c = ring_vertex(r + 1, s), d = ring_vertex(r + 1, s + 1);
      mesh.faces.push_back({a, b, d});
      mesh.faces.push_back({a, d, c});
    }
  }
  // End caps, fanned around center vertices; bottom faces point -z, top +z.
  const int bottom_center = static_cast<int>(mesh.vertices.size());
  mesh.vertices.push_back({0.0, 0.0, -1.0});
  const int top_center = static_cast<int>(mesh.vertices.size());
  mesh.vertices.push_back({0.0, 0.0, 1.0});
  for (int s = 0; s < kSegments; ++s) {
    mesh.faces.push_back({bottom_center, ring_vertex(0, s + 1), ring_vertex(0, s)});
    mesh.faces.push_back({top_center, ring_vertex(kRings - 1, s), ring_vertex(kRings - 1, s + 1)});
  }
  return mesh;
}

VecX collapse_weights(const Vec3& p) {
  const double w2 = std::clamp(0.5 * (p.z() + 1.0), 0.0, 1.0);
  VecX w(2);
  w << 1.0 - w2, w2;
  return w;
}

double mesh_volume(const Mesh& mesh) {
  double vol = 0.0;
  for (const auto& f : mesh.faces) {
    const Vec3& a = mesh.vertices[f[0]];
    const Vec3& b = mesh.vertices[f[1]];
    const Vec3& c = mesh.vertices[f[2]];
    vol += a.dot(b.cross(c)) / 6.0;
  }
  return vol;
}

namespace {

double mid_ring_radius(const std::vector<Vec3>& deformed) {
  // Vertices 32*kSegments .. 32*kSegments+kSegments-1 are the z=0 ring.
  const int start = (kRings / 2) * kSegments;
  Vec3 centroid = Vec3::Zero();
  for (int s = 0; s < kSegments; ++s) centroid += deformed[start + s];
  centroid /= kSegments;
  double r = std::numeric_limits<double>::infinity();
  for (int s = 0; s < kSegments; ++s)
    r = std::min(r, (deformed[start + s] - centroid).norm());
  return r;
}

}  // namespace

std::vector<CollapseRow> collapse_report(const std::vector<double>& angles_deg,
                                         CollapseMode mode) {
  const Mesh rest = make_collapse_cylinder();
  std::vector<CollapseRow> rows;
  rows.reserve(angles_deg.size());
  for (double deg : angles_deg) {
    if (deg < 0.0 || deg > 180.0)
      throw ValidationError("collapse_report: angles must lie in [0, 180] degrees");
    const double rad = deg * std::numbers::pi / 180.0;
    const Vec3 axis = mode == CollapseMode::Twist ? Vec3::UnitZ() : Vec3::UnitX();
    const std::vector<DualQuaternion> pose = {
        DualQuaternion::identity(),
        dq_from_rotation_translation(Quaternion::from_axis_angle(axis, rad), Vec3::Zero())};
    std::vector<RigidTransform> rigid = {dq_to_rigid(pose[0]), dq_to_rigid(pose[1])};

    Mesh lbs = rest, dbs = rest;
    for (size_t v = 0; v < rest.vertices.size(); ++v) {
      const VecX w = collapse_weights(rest.vertices[v]);
      lbs.vertices[v] = lbs_blend(w, rigid).apply(rest.vertices[v]);
      dbs.vertices[v] = dbs_blend(w, pose).apply(rest.vertices[v]);
    }
    rows.push_back({deg, mid_ring_radius(lbs.vertices), mid_ring_radius(dbs.vertices),
                    mesh_volume(lbs), mesh_volume(dbs)});
  }
  return rows;
}

}  // namespace deformkit
