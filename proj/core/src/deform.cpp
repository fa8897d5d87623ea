#include "deformkit/deform.hpp"

namespace deformkit {

Vec3 deform_c2o(const Vec3& canonical, const Camera& cam, const VecX& weights,
                const std::vector<DualQuaternion>& pose) {
  const DualQuaternion blended = dbs_blend(weights, pose, /*invert=*/false);
  return cam.extrinsic.apply(blended.apply(canonical));
}

Vec3 deform_o2c(const Vec3& observed, const Camera& cam, const VecX& weights,
                const std::vector<DualQuaternion>& pose) {
  const DualQuaternion blended = dbs_blend(weights, pose, /*invert=*/true);
  return blended.apply(cam.extrinsic.inverse().apply(observed));
}

double cycle_residual(const Vec3& observed, const Camera& cam, const VecX& weights_o2c,
                      const VecX& weights_c2o, const std::vector<DualQuaternion>& pose) {
  const Vec3 canonical = deform_o2c(observed, cam, weights_o2c, pose);
  const Vec3 back = deform_c2o(canonical, cam, weights_c2o, pose);
  return (back - observed).squaredNorm();
}

Vec2 project(const Camera& cam, const Vec3& p) {
  if (p.z() <= 0.0) throw NumericalError("project: point at or behind the camera plane");
  return {cam.fx * p.x() / p.z() + cam.cx, cam.fy * p.y() / p.z() + cam.cy};
}

}  // namespace deformkit
