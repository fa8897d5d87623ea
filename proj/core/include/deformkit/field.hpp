#pragma once

#include <functional>
#include <memory>
#include <vector>

#include "deformkit/types.hpp"

namespace deformkit {

/// Canonical-space signed distance + color field. Sign convention: negative
/// inside the object, positive outside.
class SdfScene {
 public:
  virtual ~SdfScene() = default;
  virtual double sdf(const Vec3& p) const = 0;
  virtual Vec3 color(const Vec3& p) const = 0;
  virtual Box3 bounds() const = 0;
};

/// Analytic primitive with exact (1-Lipschitz) distance.
struct Primitive {
  enum class Kind { Sphere, Capsule, Box };

  Kind kind = Kind::Sphere;
  Vec3 center = Vec3::Zero();            // sphere, box
  double radius = 1.0;                   // sphere, capsule
  Vec3 a = Vec3::Zero(), b = Vec3::Zero();  // capsule axis endpoints
  Vec3 half_extents = Vec3::Ones();      // box
  Vec3 rgb = Vec3::Constant(0.5);

  double sdf(const Vec3& p) const;
  Box3 box() const;
  void validate(size_t index) const;
};

/// Union of analytic primitives; color taken from the nearest primitive.
class PrimitiveScene final : public SdfScene {
 public:
  explicit PrimitiveScene(std::vector<Primitive> primitives);

  double sdf(const Vec3& p) const override;
  Vec3 color(const Vec3& p) const override;
  Box3 bounds() const override;

  const std::vector<Primitive>& primitives() const { return primitives_; }

 private:
  std::vector<Primitive> primitives_;
  Box3 bounds_;
};

/// Dense lattice field with trilinear interpolation. Values are stored
/// x-fastest; node i lies at min + i * extent / (n - 1). Queries outside the
/// bounds clamp to the box and add the exterior distance to the sdf.
class GridScene final : public SdfScene {
 public:
  GridScene(std::array<int, 3> dims, Box3 box, std::vector<double> sdf_values,
            std::vector<double> color_values);

  double sdf(const Vec3& p) const override;
  Vec3 color(const Vec3& p) const override;
  Box3 bounds() const override { return box_; }

  const std::array<int, 3>& dims() const { return dims_; }

 private:
  double sample(const std::vector<double>& values, int stride, int channel, const Vec3& clamped) const;

  std::array<int, 3> dims_;
  Box3 box_;
  std::vector<double> sdf_values_;
  std::vector<double> color_values_;
};

/// Wraps arbitrary callables; used to build synthetic fields in tests.
class FunctionScene final : public SdfScene {
 public:
  FunctionScene(std::function<double(const Vec3&)> sdf_fn, Box3 box,
                std::function<Vec3(const Vec3&)> color_fn = nullptr)
      : sdf_fn_(std::move(sdf_fn)), color_fn_(std::move(color_fn)), box_(box) {
    if (!sdf_fn_) throw ValidationError("FunctionScene requires an sdf callable");
  }

  double sdf(const Vec3& p) const override { return sdf_fn_(p); }
  Vec3 color(const Vec3& p) const override {
    return color_fn_ ? color_fn_(p) : Vec3::Constant(0.5);
  }
  Box3 bounds() const override { return box_; }

 private:
  std::function<double(const Vec3&)> sdf_fn_;
  std::function<Vec3(const Vec3&)> color_fn_;
  Box3 box_;
};

/// Laplace-CDF density: amp * Phi_beta(-d). Monotone non-increasing in d,
/// 0.5 * amp at the surface, amp deep inside, 0 far outside.
double density(double signed_distance, double beta, double amp);

/// Scaled sigmoid gate on sample colors: gamma / (1 + exp(lambda * d)).
/// Suppresses color fetched outside the surface.
double texture_filter(double signed_distance, double gamma, double lambda);

/// Mean of (|grad sdf| - 1)^2 over the samples, central differences at step h.
double eikonal_residual(const SdfScene& scene, const std::vector<Vec3>& samples, double h);

}  // namespace deformkit
