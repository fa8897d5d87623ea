#pragma once

#include <Eigen/Dense>
#include <array>
#include <stdexcept>
#include <string>
#include <vector>

namespace deformkit {

using Vec2 = Eigen::Vector2d;
using Vec3 = Eigen::Vector3d;
using Vec4 = Eigen::Vector4d;
using Mat3 = Eigen::Matrix3d;
using MatX = Eigen::MatrixXd;
using VecX = Eigen::VectorXd;

/// Input that fails a contract precondition (bad file, bad argument,
/// mismatched dimensions). Maps to CLI exit code 2.
class ValidationError : public std::runtime_error {
 public:
  explicit ValidationError(const std::string& what) : std::runtime_error(what) {}
};

/// A computation that cannot proceed numerically (degenerate blend,
/// behind-camera projection, NaN loss). Maps to CLI exit code 3.
class NumericalError : public std::runtime_error {
 public:
  explicit NumericalError(const std::string& what) : std::runtime_error(what) {}
};

struct Box3 {
  Vec3 min = Vec3::Zero();
  Vec3 max = Vec3::Zero();

  Vec3 extent() const { return max - min; }
  Vec3 center() const { return 0.5 * (min + max); }
  double diagonal() const { return (max - min).norm(); }
  bool contains(const Vec3& p) const {
    return (p.array() >= min.array()).all() && (p.array() <= max.array()).all();
  }
  Box3 inflated(double margin) const {
    return Box3{min - Vec3::Constant(margin), max + Vec3::Constant(margin)};
  }
};

struct Mesh {
  std::vector<Vec3> vertices;
  std::vector<std::array<int, 3>> faces;

  bool empty() const { return vertices.empty() || faces.empty(); }
};

/// Row-major interleaved image; values are linear [0,1] for color and
/// silhouette channels, scene units for depth.
struct Image {
  int width = 0;
  int height = 0;
  int channels = 0;
  std::vector<double> data;

  Image() = default;
  Image(int w, int h, int c) : width(w), height(h), channels(c), data(size_t(w) * h * c, 0.0) {}

  double& at(int x, int y, int c) { return data[(size_t(y) * width + x) * channels + c]; }
  double at(int x, int y, int c) const { return data[(size_t(y) * width + x) * channels + c]; }
  bool same_shape(const Image& o) const {
    return width == o.width && height == o.height && channels == o.channels;
  }
};

/// Deterministic pairwise tree reduction. Summation order is fixed by the
/// input order, independent of thread count.
inline double pairwise_sum(const std::vector<double>& v) {
  // Recursion bottoms out on small runs; the split point is size/2 so the
  // tree only depends on v.size().
  struct Impl {
    static double sum(const double* p, size_t n) {
      if (n <= 8) {
        double s = 0.0;
        for (size_t i = 0; i < n; ++i) s += p[i];
        return s;
      }
      const size_t half = n / 2;
      return sum(p, half) + sum(p + half, n - half);
    }
  };
  return v.empty() ? 0.0 : Impl::sum(v.data(), v.size());
}

}  // namespace deformkit
