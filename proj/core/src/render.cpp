#include "deformkit/render.hpp"

#include <cmath>

#include "deformkit/skinning.hpp"

namespace deformkit {
namespace {

constexpr double kMinOpacity = 1e-4;   // below this a ray counts as a miss
constexpr double kMinFlowTau = 1e-12;  // samples lighter than this cannot invalidate flow

uint64_t splitmix64(uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

double unit_double(uint64_t x) { return double(x >> 11) * 0x1.0p-53; }

struct RaySample {
  double t = 0.0;
  double tau = 0.0;
  Vec3 canonical = Vec3::Zero();
  Vec3 rgb = Vec3::Zero();
  double filter = 1.0;
  VecX weights;
};

struct March {
  Vec3 dir = Vec3::UnitZ();  // unit, camera space
  double opacity = 0.0;
  std::vector<RaySample> samples;
};

March march_ray(const Vec2& pixel, const Camera& cam, const Rig& rig,
                const std::vector<DualQuaternion>& pose, const SdfScene& scene,
                const RenderConfig& cfg) {
  March out;
  out.dir = Vec3((pixel.x() - cam.cx) / cam.fx, (pixel.y() - cam.cy) / cam.fy, 1.0).normalized();

  const int n = cfg.samples;
  const double span = (cfg.far - cfg.near) / n;
  uint64_t rng = splitmix64(cfg.seed ^ splitmix64(uint64_t(int64_t(std::llround(pixel.x() * 8.0))) ^
                                                  (uint64_t(int64_t(std::llround(pixel.y() * 8.0))) << 32)));
  std::vector<double> ts(n), deltas(n), sigmas(n);
  for (int k = 0; k < n; ++k) {
    double u = 0.5;
    if (cfg.jitter) {
      rng = splitmix64(rng);
      u = unit_double(rng);
    }
    ts[k] = cfg.near + (k + u) * span;
  }
  for (int k = 0; k < n; ++k) deltas[k] = (k + 1 < n ? ts[k + 1] : cfg.far) - ts[k];

  const RigidTransform cam_to_world = cam.extrinsic.inverse();
  const Rig posed = posed_rig(rig, pose);
  const double amp = cfg.amplitude();

  out.samples.resize(n);
  for (int k = 0; k < n; ++k) {
    RaySample& s = out.samples[k];
    s.t = ts[k];
    const Vec3 body = cam_to_world.apply(ts[k] * out.dir);
    s.weights = skin_weights(body, posed);
    s.canonical = dbs_blend(s.weights, pose, /*invert=*/true).apply(body);
    const double d = scene.sdf(s.canonical);
    sigmas[k] = density(d, cfg.beta, amp);
    s.rgb = scene.color(s.canonical);
    s.filter = cfg.texture_filtering ? texture_filter(d, cfg.gamma, cfg.lambda) : 1.0;
  }

  const std::vector<double> taus = composite_weights(sigmas, deltas);
  std::vector<double> acc(n);
  for (int k = 0; k < n; ++k) {
    out.samples[k].tau = taus[k];
    acc[k] = taus[k];
  }
  out.opacity = pairwise_sum(acc);
  return out;
}

}  // namespace

void RenderConfig::validate() const {
  if (samples < 2) throw ValidationError("render config: need at least 2 samples per ray");
  if (!(near >= 0.0) || !(far > near))
    throw ValidationError("render config: require 0 <= near < far");
  if (!(beta > 0.0)) throw ValidationError("render config: beta must be positive");
  if (!(lambda > 0.0)) throw ValidationError("render config: lambda must be positive");
  if (gamma < 0.0) throw ValidationError("render config: gamma must be nonnegative");
}

std::vector<double> composite_weights(const std::vector<double>& densities,
                                      const std::vector<double>& deltas) {
  if (densities.size() != deltas.size())
    throw ValidationError("composite_weights: densities and deltas differ in length");
  std::vector<double> taus(densities.size());
  double transmittance = 1.0;
  for (size_t k = 0; k < densities.size(); ++k) {
    if (densities[k] < 0.0) throw ValidationError("composite_weights: negative density");
    if (!(deltas[k] > 0.0)) throw ValidationError("composite_weights: deltas must be positive");
    const double alpha = 1.0 - std::exp(-densities[k] * deltas[k]);
    taus[k] = alpha * transmittance;
    transmittance *= 1.0 - alpha;
  }
  return taus;
}

PixelRender render_pixel(const Vec2& pixel, const Camera& cam, const Rig& rig,
                         const std::vector<DualQuaternion>& pose, const SdfScene& scene,
                         const RenderConfig& cfg) {
  const March m = march_ray(pixel, cam, rig, pose, scene, cfg);
  PixelRender out;
  out.opacity = m.opacity;

  const size_t n = m.samples.size();
  std::vector<double> r(n), g(n), b(n), sx(n), sy(n), sz(n), depth(n);
  for (size_t k = 0; k < n; ++k) {
    const RaySample& s = m.samples[k];
    const double cw = s.tau * s.filter;
    r[k] = cw * s.rgb.x();
    g[k] = cw * s.rgb.y();
    b[k] = cw * s.rgb.z();
    sx[k] = s.tau * s.canonical.x();
    sy[k] = s.tau * s.canonical.y();
    sz[k] = s.tau * s.canonical.z();
    depth[k] = s.tau * s.t;
  }
  out.color = Vec3(pairwise_sum(r), pairwise_sum(g), pairwise_sum(b))
                  .cwiseMax(0.0)
                  .cwiseMin(1.0);
  out.surface = Vec3(pairwise_sum(sx), pairwise_sum(sy), pairwise_sum(sz));
  out.depth = m.opacity >= kMinOpacity ? pairwise_sum(depth) / m.opacity * m.dir.z() : 0.0;
  return out;
}

PixelFlow render_flow(const Vec2& pixel, const Camera& cam_t, const Camera& cam_t2,
                      const std::vector<DualQuaternion>& pose_t,
                      const std::vector<DualQuaternion>& pose_t2, const Rig& rig,
                      const SdfScene& scene, const RenderConfig& cfg) {
  const March m = march_ray(pixel, cam_t, rig, pose_t, scene, cfg);
  PixelFlow out;
  if (m.opacity < kMinOpacity) return out;

  const size_t n = m.samples.size();
  std::vector<double> px(n, 0.0), py(n, 0.0);
  for (size_t k = 0; k < n; ++k) {
    const RaySample& s = m.samples[k];
    const double w = s.tau / m.opacity;
    if (w <= kMinFlowTau) continue;
    const Vec3 forward = dbs_blend(s.weights, pose_t2, /*invert=*/false).apply(s.canonical);
    const Vec3 cam_pt = cam_t2.extrinsic.apply(forward);
    if (cam_pt.z() <= 0.0) return out;  // behind the target camera
    px[k] = w * (cam_t2.fx * cam_pt.x() / cam_pt.z() + cam_t2.cx);
    py[k] = w * (cam_t2.fy * cam_pt.y() / cam_pt.z() + cam_t2.cy);
  }
  out.flow = Vec2(pairwise_sum(px) - pixel.x(), pairwise_sum(py) - pixel.y());
  out.valid = true;
  return out;
}

ImageSet render_image(int width, int height, const Camera& cam, const Rig& rig,
                      const std::vector<DualQuaternion>& pose, const SdfScene& scene,
                      const RenderConfig& cfg) {
  if (width < 1 || height < 1) throw ValidationError("render_image: empty image");
  cfg.validate();
  cam.validate();
  rig.validate();

  ImageSet set;
  set.color = Image(width, height, 3);
  set.opacity = Image(width, height, 1);
  set.depth = Image(width, height, 1);
  set.surface = Image(width, height, 3);

#pragma omp parallel for schedule(dynamic, 1)
  for (int y = 0; y < height; ++y)
    for (int x = 0; x < width; ++x) {
      const PixelRender px = render_pixel(Vec2(x + 0.5, y + 0.5), cam, rig, pose, scene, cfg);
      for (int c = 0; c < 3; ++c) set.color.at(x, y, c) = px.color[c];
      set.opacity.at(x, y, 0) = px.opacity;
      set.depth.at(x, y, 0) = px.depth;
      for (int c = 0; c < 3; ++c) set.surface.at(x, y, c) = px.surface[c];
    }
  return set;
}

ImageSet render_image_with_flow(int width, int height, const Camera& cam_t, const Camera& cam_t2,
                                const std::vector<DualQuaternion>& pose_t,
                                const std::vector<DualQuaternion>& pose_t2, const Rig& rig,
                                const SdfScene& scene, const RenderConfig& cfg) {
  ImageSet set = render_image(width, height, cam_t, rig, pose_t, scene, cfg);
  set.flow = Image(width, height, 2);
  set.flow_valid = Image(width, height, 1);
  set.has_flow = true;

#pragma omp parallel for schedule(dynamic, 1)
  for (int y = 0; y < height; ++y)
    for (int x = 0; x < width; ++x) {
      const PixelFlow f = render_flow(Vec2(x + 0.5, y + 0.5), cam_t, cam_t2, pose_t, pose_t2,
                                      rig, scene, cfg);
      set.flow.at(x, y, 0) = f.flow.x();
      set.flow.at(x, y, 1) = f.flow.y();
      set.flow_valid.at(x, y, 0) = f.valid ? 1.0 : 0.0;
    }
  return set;
}

}  // namespace deformkit
