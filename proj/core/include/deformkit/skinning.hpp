#pragma once

#include <vector>

#include "deformkit/dualquat.hpp"
#include "deformkit/rig.hpp"
#include "deformkit/types.hpp"

namespace deformkit {

/// Linear part + translation of a blended transform. Linear blending of
/// rotations is not closed, so the linear part is a general 3x3 matrix.
struct Affine {
  Mat3 linear = Mat3::Identity();
  Vec3 translation = Vec3::Zero();

  Vec3 apply(const Vec3& p) const { return linear * p + translation; }
};

/// Convex combination of rigid transforms as matrices. The result is in
/// general not rigid; scale and shear appear for large rotations.
Affine lbs_blend(const VecX& weights, const std::vector<RigidTransform>& transforms);

/// Convex combination of unit dual quaternions followed by normalization;
/// always yields a rigid transform. Before summing, each input is
/// sign-flipped to the hemisphere of the largest-weight input so that
/// antipodal representations of the same rotation do not cancel. With
/// `invert` set, the per-joint inverses are blended instead.
///
/// Throws NumericalError when the blended real part has near-zero norm
/// (equal-weight blend of 180-degree-opposed rotations).
DualQuaternion dbs_blend(const VecX& weights, const std::vector<DualQuaternion>& dqs,
                         bool invert = false);

enum class SkinMethod { Lbs, Dbs };

/// Per-vertex skinning with rig-derived weights. Faces are unchanged.
Mesh skin_mesh(const Mesh& mesh, const Rig& rig, const std::vector<DualQuaternion>& pose,
               SkinMethod method);

enum class CollapseMode { Bend, Twist };

struct CollapseRow {
  double angle_deg = 0.0;
  double lbs_mid_radius = 0.0;
  double dbs_mid_radius = 0.0;
  double lbs_volume = 0.0;
  double dbs_volume = 0.0;
};

/// Canonical collapse fixture: a closed unit-radius cylinder on the z axis
/// (z in [-1,1], 32 segments, 65 rings so one ring sits exactly at z=0)
/// with weights linear in height between two joints. Joint 1 is fixed,
/// joint 2 rotates by the sweep angle: about z for Twist, about x for Bend.
Mesh make_collapse_cylinder();

/// Analytic fixture weights for a point of the collapse cylinder.
VecX collapse_weights(const Vec3& p);

/// Mid-ring radius (min vertex distance to the deformed mid-ring centroid)
/// and mesh volume for LBS and DBS across an angle sweep, in degrees.
std::vector<CollapseRow> collapse_report(const std::vector<double>& angles_deg,
                                         CollapseMode mode);

/// Signed volume via the divergence theorem; exact for closed meshes.
double mesh_volume(const Mesh& mesh);

}  // namespace deformkit
