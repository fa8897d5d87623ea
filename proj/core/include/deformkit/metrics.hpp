#pragma once

#include <cstdint>
#include <vector>

#include "deformkit/types.hpp"

namespace deformkit {

enum class ChamferMode { Sum, Mean };

/// Bidirectional nearest-neighbor squared distances: Sum adds every point's
/// contribution in both directions; Mean averages each direction and halves
/// the sum of the two means. Symmetric in its arguments.
double chamfer(const std::vector<Vec3>& pred, const std::vector<Vec3>& gt, ChamferMode mode);

/// Harmonic mean of precision and recall at distance threshold
/// threshold_fraction * (gt bounding-box diagonal), as a percentage.
double f_score(const std::vector<Vec3>& pred, const std::vector<Vec3>& gt,
               double threshold_fraction = 0.02);

/// Area-weighted uniform samples on the mesh surface, deterministic per seed.
std::vector<Vec3> sample_surface(const Mesh& mesh, int n, uint64_t seed);

/// Nearest squared distance from each query to the reference set. Brute
/// force below 512 reference points, spatial hash grid above.
std::vector<double> nearest_squared_distances(const std::vector<Vec3>& queries,
                                              const std::vector<Vec3>& reference);

}  // namespace deformkit
