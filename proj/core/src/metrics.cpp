#include "deformkit/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace deformkit {
namespace {

double uniform01(uint64_t& state) {
  state += 0x9e3779b97f4a7c15ull;
  uint64_t z = state;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  z ^= z >> 31;
  return double(z >> 11) * 0x1.0p-53;
}

// Uniform-cell spatial hash over the reference set with expanding-ring
// nearest queries. Ring r cells hold points no closer than (r-1) * cell, so
// the search stops once the best hit beats the next ring's lower bound.
class PointGrid {
 public:
  explicit PointGrid(const std::vector<Vec3>& pts) : pts_(pts) {
    Vec3 lo = pts[0], hi = pts[0];
    for (const Vec3& p : pts) {
      lo = lo.cwiseMin(p);
      hi = hi.cwiseMax(p);
    }
    origin_ = lo;
    const double max_extent = (hi - lo).maxCoeff();
    const int target = std::max(1, int(std::ceil(std::cbrt(double(pts.size())))));
    cell_ = max_extent > 0.0 ? max_extent / target : 1.0;
    for (int a = 0; a < 3; ++a)
      dims_[a] = std::max(1, int(std::floor((hi[a] - lo[a]) / cell_)) + 1);

    std::vector<int> counts(size_t(dims_[0]) * dims_[1] * dims_[2] + 1, 0);
    std::vector<int> cell_of(pts.size());
    for (size_t i = 0; i < pts.size(); ++i) {
      cell_of[i] = cell_index(coords_of(pts[i]));
      ++counts[size_t(cell_of[i]) + 1];
    }
    for (size_t c = 1; c < counts.size(); ++c) counts[c] += counts[c - 1];
    offsets_ = counts;
    order_.resize(pts.size());
    std::vector<int> cursor(offsets_.begin(), offsets_.end() - 1);
    for (size_t i = 0; i < pts.size(); ++i) order_[size_t(cursor[cell_of[i]]++)] = int(i);
  }

  double nearest_squared(const Vec3& q) const {
    const std::array<int, 3> qc = coords_of(q);
    int r_cap = 0;
    for (int a = 0; a < 3; ++a)
      r_cap = std::max({r_cap, std::abs(qc[a]), std::abs(dims_[a] - 1 - qc[a])});

    double best = std::numeric_limits<double>::infinity();
    for (int r = 0; r <= r_cap; ++r) {
      // Ring r holds nothing closer than (r - 1) * cell.
      if (r > 0 && best <= double(r - 1) * cell_ * double(r - 1) * cell_) break;
      scan_ring(q, qc, r, best);
    }
    return best;
  }

 private:
  std::array<int, 3> coords_of(const Vec3& p) const {
    return {int(std::floor((p.x() - origin_.x()) / cell_)),
            int(std::floor((p.y() - origin_.y()) / cell_)),
            int(std::floor((p.z() - origin_.z()) / cell_))};
  }
  int cell_index(const std::array<int, 3>& c) const {
    const int i = std::clamp(c[0], 0, dims_[0] - 1);
    const int j = std::clamp(c[1], 0, dims_[1] - 1);
    const int k = std::clamp(c[2], 0, dims_[2] - 1);
    return i + dims_[0] * (j + dims_[1] * k);
  }
  void scan_cell(const Vec3& q, int i, int j, int k, double& best) const {
    const int cell = i + dims_[0] * (j + dims_[1] * k);
    for (int idx = offsets_[cell]; idx < offsets_[size_t(cell) + 1]; ++idx)
      best = std::min(best, (pts_[size_t(order_[size_t(idx)])] - q).squaredNorm());
  }
  void scan_ring(const Vec3& q, const std::array<int, 3>& qc, int r, double& best) const {
    for (int dz = -r; dz <= r; ++dz) {
      const int k = qc[2] + dz;
      if (k < 0 || k >= dims_[2]) continue;
      for (int dy = -r; dy <= r; ++dy) {
        const int j = qc[1] + dy;
        if (j < 0 || j >= dims_[1]) continue;
        const bool face = std::abs(dz) == r || std::abs(dy) == r;
        for (int dx = -r; dx <= r; dx += face ? 1 : 2 * r) {
          const int i = qc[0] + dx;
          if (i < 0 || i >= dims_[0]) continue;
          scan_cell(q, i, j, k, best);
          if (r == 0) break;
        }
      }
    }
  }

  const std::vector<Vec3>& pts_;
  Vec3 origin_ = Vec3::Zero();
  double cell_ = 1.0;
  std::array<int, 3> dims_{1, 1, 1};
  std::vector<int> offsets_;
  std::vector<int> order_;
};

}  // namespace

std::vector<double> nearest_squared_distances(const std::vector<Vec3>& queries,
                                              const std::vector<Vec3>& reference) {
  if (reference.empty()) throw ValidationError("nearest neighbor: empty reference set");
  std::vector<double> out(queries.size());
  if (reference.size() < 512) {
#pragma omp parallel for schedule(static)
    for (std::int64_t qi = 0; qi < std::int64_t(queries.size()); ++qi) {
      double best = std::numeric_limits<double>::infinity();
      for (const Vec3& p : reference)
        best = std::min(best, (p - queries[size_t(qi)]).squaredNorm());
      out[size_t(qi)] = best;
    }
    return out;
  }
  const PointGrid grid(reference);
#pragma omp parallel for schedule(static)
  for (std::int64_t qi = 0; qi < std::int64_t(queries.size()); ++qi)
    out[size_t(qi)] = grid.nearest_squared(queries[size_t(qi)]);
  return out;
}

double chamfer(const std::vector<Vec3>& pred, const std::vector<Vec3>& gt, ChamferMode mode) {
  if (pred.empty() || gt.empty()) throw ValidationError("chamfer: empty point set");
  const std::vector<double> fwd = nearest_squared_distances(pred, gt);
  const std::vector<double> bwd = nearest_squared_distances(gt, pred);
  if (mode == ChamferMode::Sum) return pairwise_sum(fwd) + pairwise_sum(bwd);
  return 0.5 * (pairwise_sum(fwd) / double(fwd.size()) + pairwise_sum(bwd) / double(bwd.size()));
}

double f_score(const std::vector<Vec3>& pred, const std::vector<Vec3>& gt,
               double threshold_fraction) {
  if (pred.empty() || gt.empty()) throw ValidationError("f-score: empty point set");
  if (!(threshold_fraction > 0.0))
    throw ValidationError("f-score: threshold fraction must be positive");
  Vec3 lo = gt[0], hi = gt[0];
  for (const Vec3& p : gt) {
    lo = lo.cwiseMin(p);
    hi = hi.cwiseMax(p);
  }
  const double diagonal = (hi - lo).norm();
  if (diagonal <= 0.0)
    throw ValidationError("f-score: reference bounding box is degenerate");
  const double tau_sq = threshold_fraction * diagonal * threshold_fraction * diagonal;

  const std::vector<double> fwd = nearest_squared_distances(pred, gt);
  const std::vector<double> bwd = nearest_squared_distances(gt, pred);
  const auto fraction_within = [tau_sq](const std::vector<double>& d) {
    size_t hits = 0;
    for (double v : d)
      if (v <= tau_sq) ++hits;
    return double(hits) / double(d.size());
  };
  const double precision = fraction_within(fwd);
  const double recall = fraction_within(bwd);
  if (precision + recall <= 0.0) return 0.0;
  return 100.0 * 2.0 * precision * recall / (precision + recall);
}

std::vector<Vec3> sample_surface(const Mesh& mesh, int n, uint64_t seed) {
  if (n < 1) throw ValidationError("sample_surface: sample count must be positive");
  if (mesh.empty()) throw ValidationError("sample_surface: empty mesh");
  std::vector<double> cumulative;
  std::vector<size_t> face_of;
  cumulative.reserve(mesh.faces.size());
  double total = 0.0;
  for (size_t f = 0; f < mesh.faces.size(); ++f) {
    const Vec3& a = mesh.vertices[size_t(mesh.faces[f][0])];
    const Vec3& b = mesh.vertices[size_t(mesh.faces[f][1])];
    const Vec3& c = mesh.vertices[size_t(mesh.faces[f][2])];
    const double area = 0.5 * (b - a).cross(c - a).norm();
    if (area <= 0.0) continue;  // degenerate faces carry no mass
    total += area;
    cumulative.push_back(total);
    face_of.push_back(f);
  }
  if (total <= 0.0) throw ValidationError("sample_surface: mesh has zero surface area");

  std::vector<Vec3> samples(static_cast<size_t>(n));
  uint64_t state = seed;
  for (int i = 0; i < n; ++i) {
    const double pick = uniform01(state) * total;
    const size_t slot = size_t(
        std::lower_bound(cumulative.begin(), cumulative.end(), pick) - cumulative.begin());
    const auto& face = mesh.faces[face_of[std::min(slot, face_of.size() - 1)]];
    const Vec3& a = mesh.vertices[size_t(face[0])];
    const Vec3& b = mesh.vertices[size_t(face[1])];
    const Vec3& c = mesh.vertices[size_t(face[2])];
    double u = uniform01(state), v = uniform01(state);
    if (u + v > 1.0) {
      u = 1.0 - u;
      v = 1.0 - v;
    }
    samples[size_t(i)] = a + u * (b - a) + v * (c - a);
  }
  return samples;
}

}  // namespace deformkit
