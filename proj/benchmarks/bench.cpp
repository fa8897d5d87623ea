// Microbenchmarks for the hot paths: blending, per-pixel rendering,
// transport solves, and nearest-neighbor queries.

#include <benchmark/benchmark.h>

#include <cstdint>
#include <memory>
#include <vector>

#include "deformkit/deform.hpp"
#include "deformkit/field.hpp"
#include "deformkit/matching.hpp"
#include "deformkit/metrics.hpp"
#include "deformkit/render.hpp"
#include "deformkit/rig.hpp"
#include "deformkit/skinning.hpp"

using namespace deformkit;

namespace {

// splitmix64; matches the library's deterministic seeding style.
uint64_t mix(uint64_t& state) {
  state += 0x9e3779b97f4a7c15ULL;
  uint64_t z = state;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}
double uniform(uint64_t& state) { return double(mix(state) >> 11) * 0x1.0p-53; }
double range(uint64_t& state, double lo, double hi) { return lo + (hi - lo) * uniform(state); }

std::vector<DualQuaternion> random_pose(uint64_t seed, int joints) {
  uint64_t s = seed;
  std::vector<DualQuaternion> pose;
  pose.reserve(size_t(joints));
  for (int j = 0; j < joints; ++j) {
    Quaternion q(range(s, -1.0, 1.0), range(s, -1.0, 1.0), range(s, -1.0, 1.0),
                 range(s, -1.0, 1.0));
    if (q.norm() < 0.1) q = Quaternion::identity();
    pose.push_back(dq_from_pose7(range(s, -1.0, 1.0), range(s, -1.0, 1.0), range(s, -1.0, 1.0),
                                 q));
  }
  return pose;
}

VecX simplex_weights(uint64_t seed, int n) {
  uint64_t s = seed;
  VecX w(n);
  for (int i = 0; i < n; ++i) w[i] = range(s, 0.05, 1.0);
  return w / w.sum();
}

void BM_DbsBlend(benchmark::State& state) {
  const int joints = int(state.range(0));
  const auto pose = random_pose(7, joints);
  const VecX w = simplex_weights(11, joints);
  const Vec3 p(0.3, -0.2, 0.5);
  for (auto _ : state) {
    benchmark::DoNotOptimize(dbs_blend(w, pose).apply(p));
  }
  state.SetItemsProcessed(state.iterations());
}
BENCHMARK(BM_DbsBlend)->Arg(2)->Arg(8)->Arg(25);

void BM_LbsBlend(benchmark::State& state) {
  const int joints = int(state.range(0));
  const auto pose = random_pose(7, joints);
  std::vector<RigidTransform> rigid;
  rigid.reserve(pose.size());
  for (const auto& dq : pose) rigid.push_back(dq_to_rigid(dq));
  const VecX w = simplex_weights(11, joints);
  const Vec3 p(0.3, -0.2, 0.5);
  for (auto _ : state) {
    benchmark::DoNotOptimize(lbs_blend(w, rigid).apply(p));
  }
  state.SetItemsProcessed(state.iterations());
}
BENCHMARK(BM_LbsBlend)->Arg(2)->Arg(8)->Arg(25);

void BM_RenderPixel(benchmark::State& state) {
  Primitive s;
  s.kind = Primitive::Kind::Sphere;
  s.radius = 1.0;
  const PrimitiveScene scene({s});
  Rig rig;
  rig.joints.push_back(Joint{});
  const std::vector<DualQuaternion> pose{DualQuaternion::identity()};
  Camera cam;
  cam.extrinsic.translation = Vec3(0.0, 0.0, 4.0);
  cam.fx = cam.fy = 64.0;
  cam.cx = cam.cy = 32.0;
  RenderConfig cfg;
  cfg.samples = int(state.range(0));
  cfg.near = 2.0;
  cfg.far = 6.0;
  cfg.beta = 0.01;
  const Vec2 pixel(32.5, 32.5);
  for (auto _ : state) {
    benchmark::DoNotOptimize(render_pixel(pixel, cam, rig, pose, scene, cfg));
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_RenderPixel)->Arg(32)->Arg(128)->Arg(512);

void BM_Sinkhorn(benchmark::State& state) {
  const int n = int(state.range(0));
  uint64_t s = 23;
  MatX cost(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) cost(i, j) = uniform(s);
  for (auto _ : state) {
    benchmark::DoNotOptimize(sinkhorn(cost, 0.01, 2000, 1e-6));
  }
}
BENCHMARK(BM_Sinkhorn)->Arg(16)->Arg(64)->Arg(128);

void BM_NearestDistances(benchmark::State& state) {
  const int n = int(state.range(0));
  uint64_t s = 31;
  std::vector<Vec3> queries(static_cast<size_t>(n)), refs(static_cast<size_t>(n));
  for (auto& p : queries) p = Vec3(range(s, -1, 1), range(s, -1, 1), range(s, -1, 1));
  for (auto& p : refs) p = Vec3(range(s, -1, 1), range(s, -1, 1), range(s, -1, 1));
  for (auto _ : state) {
    benchmark::DoNotOptimize(nearest_squared_distances(queries, refs));
  }
  state.SetItemsProcessed(state.iterations() * n);
}
BENCHMARK(BM_NearestDistances)->Arg(256)->Arg(2048)->Arg(16384);

}  // namespace

BENCHMARK_MAIN();
