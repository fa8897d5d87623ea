#pragma once

#include <memory>
#include <vector>

#include "deformkit/deform.hpp"
#include "deformkit/field.hpp"
#include "deformkit/losses.hpp"
#include "deformkit/render.hpp"
#include "deformkit/rig.hpp"
#include "deformkit/types.hpp"

namespace deformkit {

/// One target frame: images to explain plus the camera that saw them. Flow
/// targets are optional; flow_to names the frame time the flow points at.
struct FitFrame {
  int t = 0;
  Camera cam;
  Image color;       // 3 channels
  Image silhouette;  // 1 channel
  Image flow;        // 2 channels; empty when unused
  Image flow_valid;  // 1 channel; empty when unused
  int flow_to = -1;

  bool has_flow() const { return flow.width > 0; }
};

struct OptimizerSettings {
  int iterations = 300;
  double step = 0.1;       // initial line-search scale, parameter units
  double fd_step = 1e-3;   // central-difference half step
  double grad_tol = 1e-6;  // stop below this gradient norm
  int max_halvings = 20;
  uint64_t seed = 0;
  bool normalize = true;  // divide pixel losses by the pixel count

  void validate() const;
};

struct FitProblem {
  std::shared_ptr<const SdfScene> scene;
  Rig rig;
  PoseTable init;
  std::vector<FitFrame> frames;
  RenderConfig render;
  LossWeights weights;
  OptimizerSettings opt;

  void validate() const;
  bool has_frame_time(int t) const;
};

struct FitTraceRow {
  int frame_t = 0;
  int iteration = 0;
  double loss = 0.0;
  double grad_norm = 0.0;
  double step = 0.0;
};

struct FitResult {
  PoseTable pose;
  std::vector<FitTraceRow> trace;
  std::vector<LossReport> reports;  // per frame, at the fitted parameters
};

/// Evaluates the frame's composite loss at an explicit joint configuration.
/// pose_of_time supplies other frames' poses for the flow term; pass the
/// problem's init table when no better estimate exists.
double evaluate_frame_loss(const FitProblem& problem, size_t frame_index,
                           const std::vector<PoseParam>& joints, const PoseTable& pose_of_time,
                           LossReport* report = nullptr);

/// Per-frame gradient descent over the 7 scalars per joint with central
/// finite differences and a backtracking line search. The loss trace is
/// monotone non-increasing; returns the best parameters seen. Quaternion
/// blocks are renormalized after every accepted step. NaN losses abort with
/// the offending term named.
FitResult fit_pose(const FitProblem& problem);

/// Same machinery over one frame's 6 extrinsic parameters (axis-angle
/// rotation delta composed onto the initial rotation, plus a translation
/// delta); the pose table stays fixed.
Camera refit_camera(const FitProblem& problem, const PoseTable& fixed_pose, size_t frame_index,
                    std::vector<FitTraceRow>* trace = nullptr);

}  // namespace deformkit
