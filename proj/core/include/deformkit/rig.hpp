#pragma once

#include <cstdint>
#include <vector>

#include "deformkit/dualquat.hpp"
#include "deformkit/types.hpp"

namespace deformkit {

/// A joint is an explicit Gaussian ellipsoid: center, orthonormal
/// orientation, and a diagonal precision (inverse squared scale).
struct Joint {
  Vec3 center = Vec3::Zero();
  Mat3 orientation = Mat3::Identity();
  Vec3 precision = Vec3::Ones();
};

struct Rig {
  std::vector<Joint> joints;

  int joint_count() const { return static_cast<int>(joints.size()); }

  void validate() const;

  /// J joints with identity orientation, isotropic precision, and centers
  /// uniformly distributed in the unit cube (deterministic under seed).
  static Rig default_init(int joint_count = 25, uint64_t seed = 42,
                          double precision = 1.0);
};

/// Per-joint 7-scalar pose record (translation + rotation quaternion).
struct PoseParam {
  Vec3 t = Vec3::Zero();
  Quaternion q = Quaternion::identity();

  DualQuaternion dq() const { return dq_from_pose7(t.x(), t.y(), t.z(), q); }
};

/// Per-frame, per-joint pose records. Frames are keyed by an integer time
/// index; derived dual quaternions are always unit by construction.
struct PoseTable {
  struct Frame {
    int t = 0;
    std::vector<PoseParam> joints;
  };
  std::vector<Frame> frames;

  const Frame& frame(int t) const;
  bool has_frame(int t) const;
  std::vector<DualQuaternion> dqs(int t) const;

  static PoseTable identity(int joint_count, const std::vector<int>& times);
};

/// Squared Mahalanobis distance from p to each joint ellipsoid:
/// (p-O)^T V^T diag(Λ) V (p-O).
VecX mahalanobis_scores(const Vec3& p, const Rig& rig);

/// Simplex skinning weights: softmax over negated Mahalanobis scores, plus
/// an optional additive per-joint bias (zero when empty).
VecX skin_weights(const Vec3& p, const Rig& rig, const VecX& bias = VecX());

/// Rig with every joint moved by its per-joint rigid motion; Mahalanobis
/// scores of co-moving points are preserved. Used to evaluate
/// observation-space weights against deformed joint locations.
Rig posed_rig(const Rig& rig, const std::vector<DualQuaternion>& pose);

}  // namespace deformkit
