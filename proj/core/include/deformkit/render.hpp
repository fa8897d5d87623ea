#pragma once

#include <cstdint>
#include <vector>

#include "deformkit/deform.hpp"
#include "deformkit/field.hpp"
#include "deformkit/rig.hpp"
#include "deformkit/types.hpp"

namespace deformkit {

struct RenderConfig {
  int samples = 128;        // points per ray
  double near = 0.1;        // metric distance along the unit ray direction
  double far = 10.0;
  double beta = 0.01;       // density falloff scale
  double gamma = 1.5;       // texture filter ceiling
  double lambda = 10.0;     // texture filter sharpness
  double amp = 0.0;         // density amplitude; <= 0 means 1/beta
  bool texture_filtering = true;
  bool jitter = false;      // stratify with per-pixel random offsets
  uint64_t seed = 0;

  double amplitude() const { return amp > 0.0 ? amp : 1.0 / beta; }
  void validate() const;
};

/// One pixel's composited outputs. The surface point is the weight-blended
/// canonical point (weights left unnormalized, matching opacity).
struct PixelRender {
  Vec3 color = Vec3::Zero();
  double opacity = 0.0;
  double depth = 0.0;           // composited camera-space z, 0 on miss rays
  Vec3 surface = Vec3::Zero();  // canonical-space blend
};

struct PixelFlow {
  Vec2 flow = Vec2::Zero();
  bool valid = false;  // false on miss rays and behind-camera re-projections
};

/// Full-image buffers; flow planes are filled only when has_flow is set.
struct ImageSet {
  Image color;       // 3 channels
  Image opacity;     // 1 channel
  Image depth;       // 1 channel
  Image surface;     // 3 channels, canonical points
  Image flow;        // 2 channels
  Image flow_valid;  // 1 channel, 0 or 1
  bool has_flow = false;
};

/// tau_k = alpha_k * prod_{i<k} (1 - alpha_i) with alpha = 1 - exp(-sigma
/// delta). Sum tau = 1 - prod(1 - alpha) <= 1.
std::vector<double> composite_weights(const std::vector<double>& densities,
                                      const std::vector<double>& deltas);

/// Marches the pixel's camera ray, warping every sample to canonical space
/// through the inverse blended body transform before field lookups.
PixelRender render_pixel(const Vec2& pixel, const Camera& cam, const Rig& rig,
                         const std::vector<DualQuaternion>& pose, const SdfScene& scene,
                         const RenderConfig& cfg);

/// Screen-space displacement of the pixel's surface toward frame t'. The
/// frame-t compositing weights (normalized to sum 1) are applied to the
/// frame-t' projections; each sample reuses its frame-t skinning weights for
/// the forward warp so a static scene maps to itself exactly.
PixelFlow render_flow(const Vec2& pixel, const Camera& cam_t, const Camera& cam_t2,
                      const std::vector<DualQuaternion>& pose_t,
                      const std::vector<DualQuaternion>& pose_t2, const Rig& rig,
                      const SdfScene& scene, const RenderConfig& cfg);

ImageSet render_image(int width, int height, const Camera& cam, const Rig& rig,
                      const std::vector<DualQuaternion>& pose, const SdfScene& scene,
                      const RenderConfig& cfg);

/// render_image plus flow toward the second (camera, pose) pair.
ImageSet render_image_with_flow(int width, int height, const Camera& cam_t, const Camera& cam_t2,
                                const std::vector<DualQuaternion>& pose_t,
                                const std::vector<DualQuaternion>& pose_t2, const Rig& rig,
                                const SdfScene& scene, const RenderConfig& cfg);

}  // namespace deformkit
