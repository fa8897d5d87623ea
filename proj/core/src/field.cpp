#include "deformkit/field.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace deformkit {

double Primitive::sdf(const Vec3& p) const {
  switch (kind) {
    case Kind::Sphere:
      return (p - center).norm() - radius;
    case Kind::Capsule: {
      const Vec3 ab = b - a;
      const double len2 = ab.squaredNorm();
      const double t = len2 > 0.0 ? std::clamp((p - a).dot(ab) / len2, 0.0, 1.0) : 0.0;
      return (p - (a + t * ab)).norm() - radius;
    }
    case Kind::Box: {
      const Vec3 q = (p - center).cwiseAbs() - half_extents;
      const Vec3 outside = q.cwiseMax(0.0);
      return outside.norm() + std::min(q.maxCoeff(), 0.0);
    }
  }
  throw ValidationError("unknown primitive kind");
}

Box3 Primitive::box() const {
  switch (kind) {
    case Kind::Sphere:
      return {center - Vec3::Constant(radius), center + Vec3::Constant(radius)};
    case Kind::Capsule:
      return {a.cwiseMin(b) - Vec3::Constant(radius), a.cwiseMax(b) + Vec3::Constant(radius)};
    case Kind::Box:
      return {center - half_extents, center + half_extents};
  }
  throw ValidationError("unknown primitive kind");
}

void Primitive::validate(size_t index) const {
  const std::string where = "primitive " + std::to_string(index) + ": ";
  if (kind == Kind::Sphere || kind == Kind::Capsule) {
    if (!(radius > 0.0)) throw ValidationError(where + "radius must be positive");
  }
  if (kind == Kind::Box) {
    if (!(half_extents.minCoeff() > 0.0))
      throw ValidationError(where + "half extents must be positive");
  }
  if (!rgb.allFinite() || rgb.minCoeff() < 0.0 || rgb.maxCoeff() > 1.0)
    throw ValidationError(where + "color must lie in [0,1]^3");
}

PrimitiveScene::PrimitiveScene(std::vector<Primitive> primitives)
    : primitives_(std::move(primitives)) {
  if (primitives_.empty()) throw ValidationError("scene needs at least one primitive");
  for (size_t i = 0; i < primitives_.size(); ++i) primitives_[i].validate(i);
  bounds_ = primitives_[0].box();
  for (size_t i = 1; i < primitives_.size(); ++i) {
    const Box3 b = primitives_[i].box();
    bounds_.min = bounds_.min.cwiseMin(b.min);
    bounds_.max = bounds_.max.cwiseMax(b.max);
  }
}

double PrimitiveScene::sdf(const Vec3& p) const {
  double best = std::numeric_limits<double>::infinity();
  for (const Primitive& prim : primitives_) best = std::min(best, prim.sdf(p));
  return best;
}

Vec3 PrimitiveScene::color(const Vec3& p) const {
  double best = std::numeric_limits<double>::infinity();
  const Primitive* nearest = &primitives_[0];
  for (const Primitive& prim : primitives_) {
    const double d = prim.sdf(p);
    if (d < best) {
      best = d;
      nearest = &prim;
    }
  }
  return nearest->rgb;
}

Box3 PrimitiveScene::bounds() const { return bounds_; }

GridScene::GridScene(std::array<int, 3> dims, Box3 box, std::vector<double> sdf_values,
                     std::vector<double> color_values)
    : dims_(dims), box_(box), sdf_values_(std::move(sdf_values)),
      color_values_(std::move(color_values)) {
  for (int axis = 0; axis < 3; ++axis) {
    if (dims_[axis] < 2) throw ValidationError("grid dims must be at least 2 per axis");
    if (!(box_.min[axis] < box_.max[axis]))
      throw ValidationError("grid bounds must have positive extent");
  }
  const size_t n = size_t(dims_[0]) * size_t(dims_[1]) * size_t(dims_[2]);
  if (sdf_values_.size() != n)
    throw ValidationError("grid sdf buffer size does not match dims");
  if (color_values_.size() != 3 * n)
    throw ValidationError("grid color buffer size does not match dims");
  for (double v : sdf_values_)
    if (!std::isfinite(v)) throw ValidationError("grid sdf contains non-finite values");
  for (double v : color_values_)
    if (!std::isfinite(v)) throw ValidationError("grid color contains non-finite values");
}

double GridScene::sample(const std::vector<double>& values, int stride, int channel,
                         const Vec3& clamped) const {
  const Vec3 extent = box_.max - box_.min;
  double coord[3], frac[3];
  int base[3];
  for (int axis = 0; axis < 3; ++axis) {
    coord[axis] = (clamped[axis] - box_.min[axis]) / extent[axis] * (dims_[axis] - 1);
    coord[axis] = std::clamp(coord[axis], 0.0, double(dims_[axis] - 1));
    base[axis] = std::min(int(coord[axis]), dims_[axis] - 2);
    frac[axis] = coord[axis] - base[axis];
  }
  auto at = [&](int i, int j, int k) {
    const size_t idx = size_t(i) + size_t(dims_[0]) * (size_t(j) + size_t(dims_[1]) * size_t(k));
    return values[idx * stride + channel];
  };
  double acc = 0.0;
  for (int dz = 0; dz < 2; ++dz)
    for (int dy = 0; dy < 2; ++dy)
      for (int dx = 0; dx < 2; ++dx) {
        const double w = (dx ? frac[0] : 1.0 - frac[0]) * (dy ? frac[1] : 1.0 - frac[1]) *
                         (dz ? frac[2] : 1.0 - frac[2]);
        acc += w * at(base[0] + dx, base[1] + dy, base[2] + dz);
      }
  return acc;
}

double GridScene::sdf(const Vec3& p) const {
  const Vec3 clamped = p.cwiseMax(box_.min).cwiseMin(box_.max);
  const double exterior = (p - clamped).norm();
  return sample(sdf_values_, 1, 0, clamped) + exterior;
}

Vec3 GridScene::color(const Vec3& p) const {
  const Vec3 clamped = p.cwiseMax(box_.min).cwiseMin(box_.max);
  return {sample(color_values_, 3, 0, clamped), sample(color_values_, 3, 1, clamped),
          sample(color_values_, 3, 2, clamped)};
}

double density(double signed_distance, double beta, double amp) {
  if (!(beta > 0.0)) throw ValidationError("density: beta must be positive");
  if (amp < 0.0) throw ValidationError("density: amp must be nonnegative");
  const double d = signed_distance;
  const double cdf = d >= 0.0 ? 0.5 * std::exp(-d / beta) : 1.0 - 0.5 * std::exp(d / beta);
  return amp * cdf;
}

double texture_filter(double signed_distance, double gamma, double lambda) {
  return gamma / (1.0 + std::exp(lambda * signed_distance));
}

double eikonal_residual(const SdfScene& scene, const std::vector<Vec3>& samples, double h) {
  if (samples.empty()) throw ValidationError("eikonal_residual: empty sample set");
  if (!(h > 0.0)) throw ValidationError("eikonal_residual: step must be positive");
  std::vector<double> residuals(samples.size());
  for (size_t i = 0; i < samples.size(); ++i) {
    Vec3 grad;
    for (int axis = 0; axis < 3; ++axis) {
      Vec3 lo = samples[i], hi = samples[i];
      lo[axis] -= h;
      hi[axis] += h;
      grad[axis] = (scene.sdf(hi) - scene.sdf(lo)) / (2.0 * h);
    }
    const double dev = grad.norm() - 1.0;
    residuals[i] = dev * dev;
  }
  return pairwise_sum(residuals) / double(samples.size());
}

}  // namespace deformkit
