#include <doctest.h>

#include "deformkit/losses.hpp"
#include "oracles.hpp"

using namespace deformkit;

namespace {

Image random_image(oracles::Rng& rng, int w, int h, int c) {
  Image img(w, h, c);
  for (double& v : img.data) v = rng.uniform();
  return img;
}

double naive_squared_diff(const Image& a, const Image& b) {
  double acc = 0.0;
  for (size_t i = 0; i < a.data.size(); ++i) {
    const double d = a.data[i] - b.data[i];
    acc += d * d;
  }
  return acc;
}

}  // namespace

TEST_CASE("color loss matches a naive accumulation") {
  oracles::Rng rng(91);
  const Image a = random_image(rng, 9, 7, 3);
  const Image b = random_image(rng, 9, 7, 3);
  CHECK(rgb_loss(a, a) == 0.0);
  CHECK(rgb_loss(a, b) == doctest::Approx(naive_squared_diff(a, b)).epsilon(1e-12));
  CHECK(rgb_loss(a, b) == rgb_loss(b, a));
}

TEST_CASE("color loss counts one unit per unit error") {
  Image a(4, 4, 3), b(4, 4, 3);
  b.at(2, 1, 0) = 1.0;
  b.at(3, 3, 2) = 1.0;
  CHECK(rgb_loss(a, b) == doctest::Approx(2.0).epsilon(1e-15));
}

TEST_CASE("color loss validates shapes and channel count") {
  Image a(4, 4, 3), wide(5, 4, 3), gray(4, 4, 1);
  CHECK_THROWS_AS(rgb_loss(a, wide), ValidationError);
  CHECK_THROWS_AS(rgb_loss(gray, gray), ValidationError);
}

TEST_CASE("silhouette loss matches a naive accumulation") {
  oracles::Rng rng(92);
  const Image a = random_image(rng, 12, 5, 1);
  const Image b = random_image(rng, 12, 5, 1);
  CHECK(sil_loss(a, a) == 0.0);
  CHECK(sil_loss(a, b) == doctest::Approx(naive_squared_diff(a, b)).epsilon(1e-12));
  Image rgbish(12, 5, 3);
  CHECK_THROWS_AS(sil_loss(rgbish, rgbish), ValidationError);
}

TEST_CASE("flow loss only counts pixels the mask keeps") {
  Image rendered(3, 2, 2), observed(3, 2, 2), mask(3, 2, 1);
  rendered.at(0, 0, 0) = 2.0;  // masked out below
  rendered.at(1, 0, 0) = 1.0;
  rendered.at(1, 0, 1) = -1.0;
  mask.at(1, 0, 0) = 1.0;
  bool all_masked = true;
  CHECK(flow_loss(rendered, observed, mask, &all_masked) ==
        doctest::Approx(2.0).epsilon(1e-15));
  CHECK(!all_masked);
}

TEST_CASE("fully masked flow contributes zero and reports the condition") {
  Image rendered(4, 4, 2), observed(4, 4, 2), mask(4, 4, 1);
  rendered.data.assign(rendered.data.size(), 3.0);
  bool all_masked = false;
  CHECK(flow_loss(rendered, observed, mask, &all_masked) == 0.0);
  CHECK(all_masked);
  CHECK(flow_loss(rendered, observed, mask) == 0.0);  // null report pointer is fine
}

TEST_CASE("flow loss validates channel and mask shapes") {
  Image flow2(4, 4, 2), flow3(4, 4, 3), mask(4, 4, 1), small_mask(3, 4, 1);
  CHECK_THROWS_AS(flow_loss(flow3, flow3, mask), ValidationError);
  CHECK_THROWS_AS(flow_loss(flow2, flow2, small_mask), ValidationError);
  CHECK_THROWS_AS(flow_loss(flow2, flow2, flow2), ValidationError);
}

TEST_CASE("total loss is the weighted dot product of terms") {
  LossWeights w;
  w.rgb = 0.5;
  w.sil = 2.0;
  w.flow = 0.0;
  w.match = 1.0;
  w.proj = 0.25;
  w.cycle = 3.0;
  w.eikonal = 10.0;
  LossTerms t;
  t.rgb = 2.0;
  t.sil = 1.0;
  t.flow = 7.0;  // zero weight silences it
  t.match = 0.5;
  t.proj = 4.0;
  t.cycle = 0.1;
  t.eikonal = 0.01;
  const LossReport r = total_loss(w, t);
  CHECK(r.weighted.rgb == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(r.weighted.flow == 0.0);
  const double want = 1.0 + 2.0 + 0.0 + 0.5 + 1.0 + 0.3 + 0.1;
  CHECK(r.total == doctest::Approx(want).epsilon(1e-12));
  CHECK(r.raw.flow == 7.0);
}

TEST_CASE("total loss of zero terms is zero") {
  const LossReport r = total_loss(LossWeights{}, LossTerms{});
  CHECK(r.total == 0.0);
}

TEST_CASE("one-hot weights pick out a single term") {
  LossWeights w;
  w.rgb = w.sil = w.flow = w.match = w.proj = w.cycle = w.eikonal = 0.0;
  w.sil = 1.0;
  LossTerms t;
  t.rgb = 5.0;
  t.sil = 0.75;
  CHECK(total_loss(w, t).total == doctest::Approx(0.75).epsilon(1e-15));
}

TEST_CASE("negative weights are rejected") {
  LossWeights w;
  w.eikonal = -0.01;
  CHECK_THROWS_AS(w.validate(), ValidationError);
  CHECK_THROWS_AS(total_loss(w, LossTerms{}), ValidationError);
}
