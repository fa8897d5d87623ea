#include "deformkit/losses.hpp"

namespace deformkit {
namespace {

void require_same_shape(const Image& a, const Image& b, const char* what) {
  if (!a.same_shape(b)) throw ValidationError(std::string(what) + ": image shapes differ");
}

double sum_squared_diff(const Image& a, const Image& b) {
  std::vector<double> per_pixel(size_t(a.width) * a.height, 0.0);
  for (int y = 0; y < a.height; ++y)
    for (int x = 0; x < a.width; ++x) {
      double acc = 0.0;
      for (int c = 0; c < a.channels; ++c) {
        const double d = a.at(x, y, c) - b.at(x, y, c);
        acc += d * d;
      }
      per_pixel[size_t(y) * a.width + x] = acc;
    }
  return pairwise_sum(per_pixel);
}

}  // namespace

void LossWeights::validate() const {
  for (double w : {rgb, sil, flow, match, proj, cycle, eikonal})
    if (w < 0.0) throw ValidationError("loss weights must be nonnegative");
}

double rgb_loss(const Image& rendered, const Image& observed) {
  require_same_shape(rendered, observed, "rgb loss");
  if (rendered.channels != 3) throw ValidationError("rgb loss: expected 3-channel images");
  return sum_squared_diff(rendered, observed);
}

double sil_loss(const Image& opacity, const Image& mask) {
  require_same_shape(opacity, mask, "silhouette loss");
  if (opacity.channels != 1) throw ValidationError("silhouette loss: expected 1-channel images");
  return sum_squared_diff(opacity, mask);
}

double flow_loss(const Image& rendered_flow, const Image& observed_flow, const Image& valid_mask,
                 bool* all_masked) {
  require_same_shape(rendered_flow, observed_flow, "flow loss");
  if (rendered_flow.channels != 2) throw ValidationError("flow loss: expected 2-channel flows");
  if (valid_mask.width != rendered_flow.width || valid_mask.height != rendered_flow.height ||
      valid_mask.channels != 1)
    throw ValidationError("flow loss: mask shape mismatch");

  std::vector<double> per_pixel(size_t(rendered_flow.width) * rendered_flow.height, 0.0);
  size_t valid = 0;
  for (int y = 0; y < rendered_flow.height; ++y)
    for (int x = 0; x < rendered_flow.width; ++x) {
      if (valid_mask.at(x, y, 0) <= 0.5) continue;
      ++valid;
      const double du = rendered_flow.at(x, y, 0) - observed_flow.at(x, y, 0);
      const double dv = rendered_flow.at(x, y, 1) - observed_flow.at(x, y, 1);
      per_pixel[size_t(y) * rendered_flow.width + x] = du * du + dv * dv;
    }
  if (all_masked) *all_masked = valid == 0;
  return pairwise_sum(per_pixel);
}

LossReport total_loss(const LossWeights& weights, const LossTerms& terms) {
  weights.validate();
  LossReport report;
  report.raw = terms;
  report.weighted.rgb = weights.rgb * terms.rgb;
  report.weighted.sil = weights.sil * terms.sil;
  report.weighted.flow = weights.flow * terms.flow;
  report.weighted.match = weights.match * terms.match;
  report.weighted.proj = weights.proj * terms.proj;
  report.weighted.cycle = weights.cycle * terms.cycle;
  report.weighted.eikonal = weights.eikonal * terms.eikonal;
  const std::vector<double> contributions{
      report.weighted.rgb,  report.weighted.sil,   report.weighted.flow,   report.weighted.match,
      report.weighted.proj, report.weighted.cycle, report.weighted.eikonal};
  report.total = pairwise_sum(contributions);
  return report;
}

}  // namespace deformkit
