#pragma once

#include <array>

#include "deformkit/field.hpp"
#include "deformkit/types.hpp"

namespace deformkit {

/// Polygonizes the zero level set of the scene's sdf over its bounds
/// (inflated slightly so closed surfaces stay strictly interior) on a
/// resolution^3 cell grid. Cut vertices are placed by linear interpolation
/// along lattice edges and welded across cells, so closed analytic inputs
/// come out watertight. Fields with no sign change yield an empty mesh.
Mesh extract_mesh(const SdfScene& scene, int resolution);

/// Same, with explicit sampling box and per-axis cell counts.
Mesh extract_mesh(const SdfScene& scene, const std::array<int, 3>& cells, const Box3& box);

}  // namespace deformkit
