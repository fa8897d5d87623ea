#pragma once

#include <vector>

#include "deformkit/dualquat.hpp"
#include "deformkit/rig.hpp"
#include "deformkit/skinning.hpp"
#include "deformkit/types.hpp"

namespace deformkit {

/// Pinhole camera. The extrinsic maps canonical/world coordinates into
/// camera coordinates (the observation space); projection applies the
/// intrinsics to camera-space points.
struct Camera {
  RigidTransform extrinsic;
  double fx = 1.0, fy = 1.0, cx = 0.0, cy = 0.0;

  void validate() const {
    if (fx <= 0.0 || fy <= 0.0) throw ValidationError("camera focal lengths must be positive");
  }
};

/// Canonical-to-observation warp: blended body transform, then extrinsic.
Vec3 deform_c2o(const Vec3& canonical, const Camera& cam, const VecX& weights,
                const std::vector<DualQuaternion>& pose);

/// Observation-to-canonical warp: inverse extrinsic, then the blend of the
/// per-joint inverses.
Vec3 deform_o2c(const Vec3& observed, const Camera& cam, const VecX& weights,
                const std::vector<DualQuaternion>& pose);

/// Squared round-trip error |c2o(o2c(x)) - x|^2. Identically zero when both
/// legs share one weight vector; generally small but nonzero when the two
/// legs use weights evaluated in their own spaces.
double cycle_residual(const Vec3& observed, const Camera& cam, const VecX& weights_o2c,
                      const VecX& weights_c2o, const std::vector<DualQuaternion>& pose);

/// Pinhole projection of a camera-space point. Throws NumericalError for
/// z <= 0 (behind the camera).
Vec2 project(const Camera& cam, const Vec3& camera_space_point);

}  // namespace deformkit
