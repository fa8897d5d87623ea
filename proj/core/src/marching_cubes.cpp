#include "deformkit/marching_cubes.hpp"

#include <algorithm>
#include <cstdint>
#include <unordered_map>
#include <vector>

namespace deformkit {
namespace {

constexpr int kCorner[8][3] = {{0, 0, 0}, {1, 0, 0}, {1, 1, 0}, {0, 1, 0},
                               {0, 0, 1}, {1, 0, 1}, {1, 1, 1}, {0, 1, 1}};

constexpr int kEdge[12][2] = {{0, 1}, {1, 2}, {2, 3}, {3, 0}, {4, 5}, {5, 6},
                              {6, 7}, {7, 4}, {0, 4}, {1, 5}, {2, 6}, {3, 7}};

// Each face lists its corners in cyclic order; edge i of the face joins face
// corners i and i+1.
struct Face {
  int corners[4];
  int edges[4];
};
constexpr Face kFaces[6] = {
    {{0, 1, 2, 3}, {0, 1, 2, 3}},    // z = 0
    {{4, 5, 6, 7}, {4, 5, 6, 7}},    // z = 1
    {{0, 1, 5, 4}, {0, 9, 4, 8}},    // y = 0
    {{2, 3, 7, 6}, {2, 11, 6, 10}},  // y = 1
    {{0, 4, 7, 3}, {8, 7, 11, 3}},   // x = 0
    {{1, 2, 6, 5}, {1, 10, 5, 9}},   // x = 1
};

using Tri = std::array<int, 3>;  // cut-edge indices

// The per-configuration triangulations are derived once instead of
// transcribed: cut edges follow from the corner signs, each face contributes
// segments joining its cut edges (ambiguous faces split so that every inside
// corner is cut off, a sign-local rule, so adjacent cells always agree on the
// shared face and the mesh cannot open along it), the segments close into
// loops, and each loop is fanned into triangles wound outward.
std::array<std::vector<Tri>, 256> build_case_table() {
  std::array<std::vector<Tri>, 256> table;
  for (int mask = 0; mask < 256; ++mask) {
    bool inside[8];
    for (int c = 0; c < 8; ++c) inside[c] = (mask >> c) & 1;
    bool cut[12];
    for (int e = 0; e < 12; ++e) cut[e] = inside[kEdge[e][0]] != inside[kEdge[e][1]];

    int link[12][2];
    int degree[12] = {};
    auto connect = [&](int ea, int eb) {
      link[ea][degree[ea]++] = eb;
      link[eb][degree[eb]++] = ea;
    };
    for (const Face& face : kFaces) {
      int cut_edges[4], n_cut = 0;
      for (int i = 0; i < 4; ++i)
        if (cut[face.edges[i]]) cut_edges[n_cut++] = face.edges[i];
      if (n_cut == 2) {
        connect(cut_edges[0], cut_edges[1]);
      } else if (n_cut == 4) {
        for (int ci = 0; ci < 4; ++ci)
          if (inside[face.corners[ci]])
            connect(face.edges[(ci + 3) % 4], face.edges[ci]);
      }
    }

    bool used[12] = {};
    for (int start = 0; start < 12; ++start) {
      if (!cut[start] || used[start]) continue;
      std::vector<int> loop;
      int prev = -1, cur = start;
      do {
        loop.push_back(cur);
        used[cur] = true;
        const int next = link[cur][0] == prev ? link[cur][1] : link[cur][0];
        prev = cur;
        cur = next;
      } while (cur != start);

      // Orient the loop so triangle normals point from inside to outside,
      // judged on the midpoint polygon of the unit cell.
      auto midpoint = [&](int e) {
        return Vec3(0.5 * (kCorner[kEdge[e][0]][0] + kCorner[kEdge[e][1]][0]),
                    0.5 * (kCorner[kEdge[e][0]][1] + kCorner[kEdge[e][1]][1]),
                    0.5 * (kCorner[kEdge[e][0]][2] + kCorner[kEdge[e][1]][2]));
      };
      Vec3 normal = Vec3::Zero();
      Vec3 to_out = Vec3::Zero();
      for (size_t i = 0; i < loop.size(); ++i) {
        normal += midpoint(loop[i]).cross(midpoint(loop[(i + 1) % loop.size()]));
        const int c_in = inside[kEdge[loop[i]][0]] ? kEdge[loop[i]][0] : kEdge[loop[i]][1];
        const int c_out = inside[kEdge[loop[i]][0]] ? kEdge[loop[i]][1] : kEdge[loop[i]][0];
        to_out += Vec3(kCorner[c_out][0] - kCorner[c_in][0], kCorner[c_out][1] - kCorner[c_in][1],
                       kCorner[c_out][2] - kCorner[c_in][2]);
      }
      if (normal.dot(to_out) < 0.0) std::reverse(loop.begin(), loop.end());
      for (size_t i = 1; i + 1 < loop.size(); ++i)
        table[mask].push_back({loop[0], loop[i], loop[i + 1]});
    }
  }
  return table;
}

const std::array<std::vector<Tri>, 256>& case_table() {
  static const std::array<std::vector<Tri>, 256> table = build_case_table();
  return table;
}

}  // namespace

Mesh extract_mesh(const SdfScene& scene, const std::array<int, 3>& cells, const Box3& box) {
  for (int axis = 0; axis < 3; ++axis) {
    if (cells[axis] < 8) throw ValidationError("extract_mesh: resolution must be at least 8 per axis");
    if (cells[axis] > 256) throw ValidationError("extract_mesh: resolution above 256 is unsupported");
    if (!(box.min[axis] < box.max[axis]))
      throw ValidationError("extract_mesh: sampling box must have positive extent");
  }
  const int nx = cells[0] + 1, ny = cells[1] + 1, nz = cells[2] + 1;
  const Vec3 step((box.max.x() - box.min.x()) / cells[0], (box.max.y() - box.min.y()) / cells[1],
                  (box.max.z() - box.min.z()) / cells[2]);

  std::vector<double> values(size_t(nx) * ny * nz);
  auto node_index = [&](int i, int j, int k) {
    return size_t(i) + size_t(nx) * (size_t(j) + size_t(ny) * size_t(k));
  };
#pragma omp parallel for schedule(static)
  for (int k = 0; k < nz; ++k)
    for (int j = 0; j < ny; ++j)
      for (int i = 0; i < nx; ++i) {
        double v = scene.sdf(box.min + Vec3(i * step.x(), j * step.y(), k * step.z()));
        if (v == 0.0) v = -1e-12;  // exact surface hits count as inside
        values[node_index(i, j, k)] = v;
      }

  Mesh mesh;
  // Cut vertices are shared through a key on the global lattice edge, so the
  // two cells flanking an edge always reuse one vertex.
  std::unordered_map<uint64_t, int> edge_vertex;
  auto vertex_on_edge = [&](int i, int j, int k, int axis) {
    const uint64_t key =
        (uint64_t(axis) << 60) | (uint64_t(i) << 40) | (uint64_t(j) << 20) | uint64_t(k);
    const auto it = edge_vertex.find(key);
    if (it != edge_vertex.end()) return it->second;
    int ii = i, jj = j, kk = k;
    (axis == 0 ? ii : axis == 1 ? jj : kk) += 1;
    const double lo = values[node_index(i, j, k)];
    const double hi = values[node_index(ii, jj, kk)];
    const double t = lo / (lo - hi);
    const Vec3 a = box.min + Vec3(i * step.x(), j * step.y(), k * step.z());
    const Vec3 b = box.min + Vec3(ii * step.x(), jj * step.y(), kk * step.z());
    const int id = int(mesh.vertices.size());
    mesh.vertices.push_back(a + t * (b - a));
    edge_vertex.emplace(key, id);
    return id;
  };

  const auto& table = case_table();
  for (int k = 0; k < cells[2]; ++k)
    for (int j = 0; j < cells[1]; ++j)
      for (int i = 0; i < cells[0]; ++i) {
        int mask = 0;
        for (int c = 0; c < 8; ++c)
          if (values[node_index(i + kCorner[c][0], j + kCorner[c][1], k + kCorner[c][2])] < 0.0)
            mask |= 1 << c;
        if (mask == 0 || mask == 255) continue;
        for (const Tri& tri : table[mask]) {
          std::array<int, 3> face;
          for (int v = 0; v < 3; ++v) {
            const int e = tri[v];
            const int* c0 = kCorner[kEdge[e][0]];
            const int* c1 = kCorner[kEdge[e][1]];
            const int axis = c0[0] != c1[0] ? 0 : c0[1] != c1[1] ? 1 : 2;
            face[v] = vertex_on_edge(i + std::min(c0[0], c1[0]), j + std::min(c0[1], c1[1]),
                                     k + std::min(c0[2], c1[2]), axis);
          }
          mesh.faces.push_back(face);
        }
      }
  return mesh;
}

Mesh extract_mesh(const SdfScene& scene, int resolution) {
  const Box3 raw = scene.bounds();
  // Keep closed surfaces strictly interior to the lattice so boundary cells
  // cannot clip them open.
  const Vec3 margin = 2.0 * (raw.max - raw.min) / double(resolution);
  const Box3 box{raw.min - margin, raw.max + margin};
  return extract_mesh(scene, {resolution, resolution, resolution}, box);
}

}  // namespace deformkit
