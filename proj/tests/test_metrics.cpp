#include <doctest.h>

#include <algorithm>

#include "deformkit/metrics.hpp"
#include "oracles.hpp"

using namespace deformkit;

namespace {

std::vector<Vec3> random_cloud(oracles::Rng& rng, int n, double scale = 1.0) {
  std::vector<Vec3> pts(static_cast<size_t>(n));
  for (auto& p : pts) p = scale * rng.vec3(-1.0, 1.0);
  return pts;
}

Mesh two_triangles() {
  // One tiny and one 4x larger triangle sharing the origin corner.
  Mesh m;
  m.vertices = {Vec3(0, 0, 0), Vec3(1, 0, 0), Vec3(0, 1, 0),
                Vec3(2, 0, 1), Vec3(0, 2, 1)};
  m.faces = {{0, 1, 2}, {0, 3, 4}};
  return m;
}

}  // namespace

TEST_CASE("identical clouds score zero distance and a perfect f-score") {
  oracles::Rng rng(101);
  const auto pts = random_cloud(rng, 64);
  CHECK(chamfer(pts, pts, ChamferMode::Sum) == 0.0);
  CHECK(chamfer(pts, pts, ChamferMode::Mean) == 0.0);
  CHECK(f_score(pts, pts) == doctest::Approx(100.0).epsilon(1e-12));
}

TEST_CASE("two single points a unit apart") {
  const std::vector<Vec3> a{Vec3(0, 0, 0)};
  const std::vector<Vec3> b{Vec3(1, 0, 0)};
  CHECK(chamfer(a, b, ChamferMode::Sum) == doctest::Approx(2.0).epsilon(1e-15));
  CHECK(chamfer(a, b, ChamferMode::Mean) == doctest::Approx(1.0).epsilon(1e-15));
}

TEST_CASE("chamfer agrees with the quadratic oracle across the grid cutover") {
  oracles::Rng rng(102);
  for (const int n : {60, 513, 700}) {
    const auto a = random_cloud(rng, n);
    const auto b = random_cloud(rng, n + 17);
    const double sum = chamfer(a, b, ChamferMode::Sum);
    const double mean = chamfer(a, b, ChamferMode::Mean);
    CHECK(std::abs(sum - oracles::brute_chamfer_sum(a, b)) <= 1e-9);
    CHECK(std::abs(mean - oracles::brute_chamfer_mean(a, b)) <= 1e-9);
    CHECK(std::abs(sum - chamfer(b, a, ChamferMode::Sum)) <= 1e-12);
  }
}

TEST_CASE("nearest squared distances match brute force on clustered data") {
  oracles::Rng rng(103);
  // Tight cluster plus far outliers stress the spatial hash cell walk.
  auto ref = random_cloud(rng, 600, 0.05);
  ref.push_back(Vec3(40.0, 0.0, 0.0));
  ref.push_back(Vec3(0.0, -35.0, 2.0));
  const auto queries = random_cloud(rng, 150, 10.0);
  const auto got = nearest_squared_distances(queries, ref);
  const auto want = oracles::brute_nearest_squared(queries, ref);
  REQUIRE(got.size() == want.size());
  for (size_t i = 0; i < got.size(); ++i) CHECK(std::abs(got[i] - want[i]) <= 1e-9);
}

TEST_CASE("f-score fixture with known precision and recall") {
  // gt diagonal = |(4,4,4)| ~ 6.928, threshold = 2% ~ 0.1386.
  const std::vector<Vec3> gt{Vec3(0, 0, 0), Vec3(4, 4, 4)};
  const std::vector<Vec3> pred{Vec3(0, 0, 0), Vec3(4, 4, 4), Vec3(2, 2, 2), Vec3(1, 1, 1)};
  // precision = 2/4, recall = 2/2 -> F = 2*0.5*1/(1.5) = 2/3.
  CHECK(f_score(pred, gt) == doctest::Approx(200.0 / 3.0).epsilon(1e-12));
  const auto brute = oracles::brute_f_score(pred, gt, 0.02);
  CHECK(f_score(pred, gt) == doctest::Approx(brute).epsilon(1e-12));
}

TEST_CASE("f-score agrees with the oracle on random clouds") {
  oracles::Rng rng(104);
  for (int trial = 0; trial < 10; ++trial) {
    const auto gt = random_cloud(rng, 80);
    auto pred = gt;
    for (auto& p : pred) p += 0.05 * rng.vec3(-1.0, 1.0);
    const double got = f_score(pred, gt, 0.05);
    CHECK(std::abs(got - oracles::brute_f_score(pred, gt, 0.05)) <= 1e-9);
    CHECK(got >= 0.0);
    CHECK(got <= 100.0);
  }
}

TEST_CASE("completely disjoint clouds score zero") {
  const std::vector<Vec3> gt{Vec3(0, 0, 0), Vec3(1, 0, 0)};
  const std::vector<Vec3> pred{Vec3(100, 0, 0)};
  CHECK(f_score(pred, gt) == 0.0);
}

TEST_CASE("degenerate ground-truth extent is rejected") {
  const std::vector<Vec3> gt{Vec3(1, 2, 3), Vec3(1, 2, 3)};
  const std::vector<Vec3> pred{Vec3(0, 0, 0)};
  CHECK_THROWS_AS(f_score(pred, gt), ValidationError);
  CHECK_THROWS_AS(chamfer({}, gt, ChamferMode::Sum), ValidationError);
  CHECK_THROWS_AS(chamfer(pred, {}, ChamferMode::Mean), ValidationError);
}

TEST_CASE("surface sampling is deterministic per seed") {
  const Mesh m = two_triangles();
  const auto a = sample_surface(m, 200, 7);
  const auto b = sample_surface(m, 200, 7);
  const auto c = sample_surface(m, 200, 8);
  REQUIRE(a.size() == 200);
  CHECK(std::equal(a.begin(), a.end(), b.begin(),
                   [](const Vec3& x, const Vec3& y) { return x == y; }));
  bool any_differ = false;
  for (size_t i = 0; i < c.size(); ++i) any_differ = any_differ || (a[i] - c[i]).norm() > 0.0;
  CHECK(any_differ);
}

TEST_CASE("surface sampling weights faces by area") {
  const Mesh m = two_triangles();  // areas 0.5 and 2.0*sqrt(1.5) -> big face ~83%
  const int n = 20000;
  const auto pts = sample_surface(m, n, 11);
  int on_big = 0;
  for (const auto& p : pts) on_big += p.z() > 1e-12 ? 1 : 0;  // big face sits at z in (0,1]
  const double big_area = 0.5 * Vec3(2, 0, 1).cross(Vec3(0, 2, 1)).norm();
  const double frac = big_area / (big_area + 0.5);
  const double sigma = std::sqrt(frac * (1.0 - frac) / n);
  CHECK(std::abs(double(on_big) / n - frac) <= 4.0 * sigma);
  // every sample lies on one of the two planes
  for (const auto& p : pts) {
    const bool on_z0 = std::abs(p.z()) <= 1e-12;
    const bool on_slab = p.z() >= -1e-12 && p.z() <= 1.0 + 1e-12;
    CHECK((on_z0 || on_slab));
  }
}

TEST_CASE("degenerate faces are skipped by the sampler") {
  Mesh m;
  m.vertices = {Vec3(0, 0, 0), Vec3(1, 0, 0), Vec3(0, 1, 0), Vec3(2, 0, 0)};
  m.faces = {{0, 1, 2}, {0, 1, 3}};  // second face has zero area
  const auto pts = sample_surface(m, 500, 3);
  for (const auto& p : pts) CHECK(std::abs(p.z()) <= 1e-12);
  // all mass lands on the real triangle: x + y <= 1 within it
  for (const auto& p : pts) CHECK(p.x() + p.y() <= 1.0 + 1e-12);
}

TEST_CASE("sampler validates inputs") {
  Mesh empty;
  CHECK_THROWS_AS(sample_surface(empty, 10, 1), ValidationError);
  const Mesh m = two_triangles();
  CHECK_THROWS_AS(sample_surface(m, 0, 1), ValidationError);
  Mesh all_degenerate;
  all_degenerate.vertices = {Vec3(0, 0, 0), Vec3(1, 0, 0)};
  all_degenerate.faces = {{0, 1, 0}};
  CHECK_THROWS_AS(sample_surface(all_degenerate, 10, 1), ValidationError);
}
