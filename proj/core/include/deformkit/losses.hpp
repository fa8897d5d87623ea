#pragma once

#include "deformkit/types.hpp"

namespace deformkit {

/// Raw (unweighted) loss values. All are sums of squared errors over the
/// contributing pixels or samples.
struct LossTerms {
  double rgb = 0.0;
  double sil = 0.0;
  double flow = 0.0;
  double match = 0.0;
  double proj = 0.0;
  double cycle = 0.0;
  double eikonal = 0.0;
};

struct LossWeights {
  double rgb = 0.1;
  double sil = 1.0;
  double flow = 0.1;
  double match = 0.1;
  double proj = 0.1;
  double cycle = 1.0;
  double eikonal = 0.01;

  void validate() const;
};

struct LossReport {
  LossTerms raw;
  LossTerms weighted;
  double total = 0.0;
};

/// Sum over pixels and channels of squared color difference.
double rgb_loss(const Image& rendered, const Image& observed);

/// Sum over pixels of squared opacity-vs-mask difference.
double sil_loss(const Image& opacity, const Image& mask);

/// Sum over valid pixels (mask > 0.5) of squared 2D flow difference. A fully
/// masked frame contributes 0; *all_masked reports that condition.
double flow_loss(const Image& rendered_flow, const Image& observed_flow, const Image& valid_mask,
                 bool* all_masked = nullptr);

LossReport total_loss(const LossWeights& weights, const LossTerms& terms);

}  // namespace deformkit
