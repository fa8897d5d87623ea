#pragma once

#include <array>
#include <vector>

#include "deformkit/types.hpp"

namespace deformkit {

/// Feature banks are dense column-per-item matrices (16 rows in the file
/// format). Rejects non-finite values and zero-norm columns.
void validate_features(const MatX& features);

/// Axis-aligned lattice of canonical points, x-fastest ordering.
struct CanonicalGrid {
  std::array<int, 3> dims{20, 20, 20};
  Box3 box{Vec3::Constant(-1.0), Vec3::Constant(1.0)};

  int size() const { return dims[0] * dims[1] * dims[2]; }
  Vec3 point(int k) const;
  void validate() const;
};

/// Pairwise cosine similarity between feature columns; result is
/// fp.cols() x fq.cols() with entries in [-1, 1]. Cost for transport is
/// 1 - correlation.
MatX correlation(const MatX& fp, const MatX& fq);

struct SinkhornResult {
  MatX plan;                        // nonnegative, sums to 1
  bool converged = false;           // marginal violation reached tol
  int iterations = 0;               // row/column update rounds used
  double marginal_violation = 0.0;  // max deviation from uniform marginals
};

/// Entropic optimal transport between uniform marginals (1/rows, 1/cols),
/// solved with log-domain updates. Small epsilons are annealed toward from
/// larger ones, warm-starting the potentials, which keeps the iteration
/// count manageable at epsilon ~ 1e-3.
SinkhornResult sinkhorn(const MatX& cost, double epsilon, int max_iters = 1000,
                        double tol = 1e-6);

/// Per-row expectation of grid points under the plan, rows renormalized to
/// sum 1 so the result is a convex combination of grid points.
std::vector<Vec3> expected_match(const MatX& plan, const CanonicalGrid& grid);

/// Baseline: per-row softmax of similarity / temperature over grid points.
std::vector<Vec3> softargmax_match(const MatX& similarity, double temperature,
                                   const CanonicalGrid& grid);

/// Shannon entropy of each row after renormalizing it to a distribution.
VecX row_entropies(const MatX& plan);

struct MatchLosses {
  double match = 0.0;  // sum |expected - rendered|^2
  double proj = 0.0;   // sum |reprojected expected - pixel|^2
};

MatchLosses match_losses(const std::vector<Vec3>& expected,
                         const std::vector<Vec3>& rendered_surface,
                         const std::vector<Vec2>& reprojections,
                         const std::vector<Vec2>& pixels);

}  // namespace deformkit
