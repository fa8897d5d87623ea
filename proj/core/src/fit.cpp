#include "deformkit/fit.hpp"

#include <cmath>
#include <functional>
#include <string>

namespace deformkit {
namespace {

double splitmix_double(uint64_t& state) {
  state += 0x9e3779b97f4a7c15ull;
  uint64_t z = state;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  z ^= z >> 31;
  return double(z >> 11) * 0x1.0p-53;
}

void require_finite(double value, const char* term, int frame_t) {
  if (!std::isfinite(value))
    throw NumericalError(std::string("fit: ") + term + " loss is not finite at frame " +
                         std::to_string(frame_t));
}

std::vector<PoseParam> unpack(const VecX& theta, int joints) {
  std::vector<PoseParam> out(static_cast<size_t>(joints));
  for (int j = 0; j < joints; ++j) {
    out[size_t(j)].t = Vec3(theta[7 * j], theta[7 * j + 1], theta[7 * j + 2]);
    out[size_t(j)].q =
        Quaternion{theta[7 * j + 3], theta[7 * j + 4], theta[7 * j + 5], theta[7 * j + 6]};
  }
  return out;
}

VecX pack(const std::vector<PoseParam>& joints) {
  VecX theta(7 * Eigen::Index(joints.size()));
  for (size_t j = 0; j < joints.size(); ++j) {
    theta[Eigen::Index(7 * j)] = joints[j].t.x();
    theta[Eigen::Index(7 * j + 1)] = joints[j].t.y();
    theta[Eigen::Index(7 * j + 2)] = joints[j].t.z();
    theta[Eigen::Index(7 * j + 3)] = joints[j].q.w;
    theta[Eigen::Index(7 * j + 4)] = joints[j].q.x;
    theta[Eigen::Index(7 * j + 5)] = joints[j].q.y;
    theta[Eigen::Index(7 * j + 6)] = joints[j].q.z;
  }
  return theta;
}

// Mean round-trip error over a sparse pixel lattice at mid ray depth, with
// each leg's skinning weights evaluated in its own space.
double cycle_term(const FitFrame& frame, const Rig& rig, const std::vector<DualQuaternion>& pose,
                  const RenderConfig& cfg) {
  const int stride = std::max(1, frame.color.width / 8);
  const double t_mid = 0.5 * (cfg.near + cfg.far);
  const Rig posed = posed_rig(rig, pose);
  const RigidTransform cam_to_world = frame.cam.extrinsic.inverse();
  std::vector<double> residuals;
  for (int y = stride / 2; y < frame.color.height; y += stride)
    for (int x = stride / 2; x < frame.color.width; x += stride) {
      const Vec3 dir = Vec3((x + 0.5 - frame.cam.cx) / frame.cam.fx,
                            (y + 0.5 - frame.cam.cy) / frame.cam.fy, 1.0)
                           .normalized();
      const Vec3 observed = t_mid * dir;
      const Vec3 body = cam_to_world.apply(observed);
      const VecX w_o2c = skin_weights(body, posed);
      const Vec3 canonical = dbs_blend(w_o2c, pose, /*invert=*/true).apply(body);
      const VecX w_c2o = skin_weights(canonical, rig);
      residuals.push_back(cycle_residual(observed, frame.cam, w_o2c, w_c2o, pose));
    }
  return residuals.empty() ? 0.0 : pairwise_sum(residuals) / double(residuals.size());
}

struct DescentResult {
  VecX theta;
  double loss = 0.0;
  std::vector<FitTraceRow> trace;
};

// Shared core: central-difference gradient, steepest-descent direction,
// backtracking line search with step doubling on acceptance.
DescentResult minimize(const std::function<double(const VecX&)>& eval, VecX theta,
                       const OptimizerSettings& opt,
                       const std::function<void(VecX&)>& project, int frame_t) {
  project(theta);
  DescentResult result;
  double loss = eval(theta);
  require_finite(loss, "total", frame_t);
  double step = opt.step;

  for (int iter = 0; iter < opt.iterations; ++iter) {
    VecX grad(theta.size());
    const Eigen::Index n = theta.size();
#pragma omp parallel for schedule(dynamic, 1)
    for (Eigen::Index i = 0; i < n; ++i) {
      VecX plus = theta, minus = theta;
      plus[i] += opt.fd_step;
      minus[i] -= opt.fd_step;
      grad[i] = (eval(plus) - eval(minus)) / (2.0 * opt.fd_step);
    }
    if (!grad.allFinite())
      throw NumericalError("fit: gradient is not finite at frame " + std::to_string(frame_t));

    const double grad_norm = grad.norm();
    if (grad_norm <= opt.grad_tol) {
      result.trace.push_back({frame_t, iter, loss, grad_norm, 0.0});
      break;
    }

    const VecX dir = -grad / grad_norm;
    double trial_step = step;
    bool accepted = false;
    for (int h = 0; h <= opt.max_halvings; ++h) {
      VecX candidate = theta + trial_step * dir;
      project(candidate);
      const double candidate_loss = eval(candidate);
      require_finite(candidate_loss, "total", frame_t);
      if (candidate_loss < loss) {
        theta = candidate;
        loss = candidate_loss;
        step = trial_step * 2.0;
        accepted = true;
        break;
      }
      trial_step *= 0.5;
    }
    result.trace.push_back({frame_t, iter, loss, grad_norm, accepted ? step * 0.5 : 0.0});
    if (!accepted) break;  // line search exhausted: local floor reached
  }
  result.theta = theta;
  result.loss = loss;
  return result;
}

}  // namespace

void OptimizerSettings::validate() const {
  if (iterations < 0) throw ValidationError("optimizer: iterations must be nonnegative");
  if (!(step > 0.0)) throw ValidationError("optimizer: step must be positive");
  if (!(fd_step > 0.0)) throw ValidationError("optimizer: fd step must be positive");
  if (grad_tol < 0.0) throw ValidationError("optimizer: gradient tolerance must be nonnegative");
  if (max_halvings < 0) throw ValidationError("optimizer: max halvings must be nonnegative");
}

void FitProblem::validate() const {
  if (!scene) throw ValidationError("fit problem: missing scene");
  rig.validate();
  if (frames.empty()) throw ValidationError("fit problem: needs at least one frame");
  render.validate();
  weights.validate();
  opt.validate();
  const int w = frames[0].color.width, h = frames[0].color.height;
  for (const FitFrame& f : frames) {
    f.cam.validate();
    if (!has_frame_time(f.t)) throw ValidationError("fit problem: no initial pose for frame " +
                                                    std::to_string(f.t));
    if (f.color.width != w || f.color.height != h)
      throw ValidationError("fit problem: frames have mismatched image sizes");
    if (f.color.channels != 3) throw ValidationError("fit problem: color targets need 3 channels");
    if (f.silhouette.width != w || f.silhouette.height != h || f.silhouette.channels != 1)
      throw ValidationError("fit problem: silhouette target shape mismatch");
    if (f.has_flow()) {
      if (f.flow.width != w || f.flow.height != h || f.flow.channels != 2)
        throw ValidationError("fit problem: flow target shape mismatch");
      if (f.flow_valid.width != w || f.flow_valid.height != h || f.flow_valid.channels != 1)
        throw ValidationError("fit problem: flow validity mask shape mismatch");
      bool found = false;
      for (const FitFrame& other : frames) found = found || other.t == f.flow_to;
      if (!found)
        throw ValidationError("fit problem: flow_to frame " + std::to_string(f.flow_to) +
                              " is not in the problem");
    }
  }
}

bool FitProblem::has_frame_time(int t) const { return init.has_frame(t); }

double evaluate_frame_loss(const FitProblem& problem, size_t frame_index,
                           const std::vector<PoseParam>& joints, const PoseTable& pose_of_time,
                           LossReport* report) {
  const FitFrame& frame = problem.frames.at(frame_index);
  std::vector<DualQuaternion> pose(joints.size());
  for (size_t j = 0; j < joints.size(); ++j) pose[j] = joints[j].dq();

  const double inv_pixels =
      problem.opt.normalize ? 1.0 / (double(frame.color.width) * frame.color.height) : 1.0;

  LossTerms terms;
  ImageSet rendered;
  if (frame.has_flow() && problem.weights.flow > 0.0) {
    const FitFrame* target = nullptr;
    for (const FitFrame& other : problem.frames)
      if (other.t == frame.flow_to) target = &other;
    if (!target)
      throw ValidationError("fit: flow_to frame " + std::to_string(frame.flow_to) +
                            " is not in the problem");
    const std::vector<DualQuaternion> pose2 = pose_of_time.dqs(frame.flow_to);
    rendered = render_image_with_flow(frame.color.width, frame.color.height, frame.cam,
                                      target->cam, pose, pose2, problem.rig, *problem.scene,
                                      problem.render);
    Image mask(frame.color.width, frame.color.height, 1);
    for (size_t i = 0; i < mask.data.size(); ++i)
      mask.data[i] = (rendered.flow_valid.data[i] > 0.5 && frame.flow_valid.data[i] > 0.5) ? 1.0 : 0.0;
    terms.flow = flow_loss(rendered.flow, frame.flow, mask) * inv_pixels;
  } else {
    rendered = render_image(frame.color.width, frame.color.height, frame.cam, problem.rig, pose,
                            *problem.scene, problem.render);
  }

  if (problem.weights.rgb > 0.0) terms.rgb = rgb_loss(rendered.color, frame.color) * inv_pixels;
  if (problem.weights.sil > 0.0)
    terms.sil = sil_loss(rendered.opacity, frame.silhouette) * inv_pixels;
  if (problem.weights.cycle > 0.0)
    terms.cycle = cycle_term(frame, problem.rig, pose, problem.render);
  if (problem.weights.eikonal > 0.0) {
    // Scene-only term: constant in the pose, kept for reporting.
    const Box3 box = problem.scene->bounds();
    uint64_t state = problem.opt.seed ^ 0x5ca1ab1eull;
    std::vector<Vec3> samples(64);
    for (Vec3& s : samples)
      for (int a = 0; a < 3; ++a)
        s[a] = box.min[a] + splitmix_double(state) * (box.max[a] - box.min[a]);
    terms.eikonal = eikonal_residual(*problem.scene, samples, 1e-3);
  }

  require_finite(terms.rgb, "rgb", frame.t);
  require_finite(terms.sil, "silhouette", frame.t);
  require_finite(terms.flow, "flow", frame.t);
  require_finite(terms.cycle, "cycle", frame.t);
  require_finite(terms.eikonal, "eikonal", frame.t);

  const LossReport full = total_loss(problem.weights, terms);
  if (report) *report = full;
  return full.total;
}

FitResult fit_pose(const FitProblem& problem) {
  problem.validate();
  FitResult result;
  result.pose = problem.init;

  for (size_t fi = 0; fi < problem.frames.size(); ++fi) {
    const FitFrame& frame = problem.frames[fi];
    const std::vector<PoseParam>& init_joints = problem.init.frame(frame.t).joints;
    const int joints = int(init_joints.size());

    const auto eval = [&](const VecX& theta) {
      return evaluate_frame_loss(problem, fi, unpack(theta, joints), result.pose);
    };
    const auto project = [joints](VecX& theta) {
      for (int j = 0; j < joints; ++j) {
        const double n = std::sqrt(theta[7 * j + 3] * theta[7 * j + 3] +
                                   theta[7 * j + 4] * theta[7 * j + 4] +
                                   theta[7 * j + 5] * theta[7 * j + 5] +
                                   theta[7 * j + 6] * theta[7 * j + 6]);
        if (n < 1e-12)
          throw NumericalError("fit: quaternion block collapsed to zero");
        for (int c = 3; c < 7; ++c) theta[7 * j + c] /= n;
      }
    };

    DescentResult frame_result =
        minimize(eval, pack(init_joints), problem.opt, project, frame.t);

    // Publish the fitted frame so later frames' flow terms see it.
    for (PoseTable::Frame& stored : result.pose.frames)
      if (stored.t == frame.t) stored.joints = unpack(frame_result.theta, joints);
    result.trace.insert(result.trace.end(), frame_result.trace.begin(), frame_result.trace.end());

    LossReport report;
    evaluate_frame_loss(problem, fi, unpack(frame_result.theta, joints), result.pose, &report);
    result.reports.push_back(report);
  }
  return result;
}

Camera refit_camera(const FitProblem& problem, const PoseTable& fixed_pose, size_t frame_index,
                    std::vector<FitTraceRow>* trace) {
  problem.validate();
  if (frame_index >= problem.frames.size())
    throw ValidationError("refit_camera: frame index out of range");
  const FitFrame& frame = problem.frames[frame_index];
  const Camera base = frame.cam;
  const std::vector<PoseParam>& joints = fixed_pose.frame(frame.t).joints;

  const auto camera_at = [&](const VecX& theta) {
    Camera cam = base;
    const Vec3 omega(theta[0], theta[1], theta[2]);
    const double angle = omega.norm();
    const Quaternion q = angle > 1e-18
                             ? Quaternion::from_axis_angle(omega / angle, angle)
                             : Quaternion::identity();
    cam.extrinsic.rotation = quat_to_matrix(q) * base.extrinsic.rotation;
    cam.extrinsic.translation = base.extrinsic.translation + Vec3(theta[3], theta[4], theta[5]);
    return cam;
  };

  const double inv_pixels =
      problem.opt.normalize ? 1.0 / (double(frame.color.width) * frame.color.height) : 1.0;
  std::vector<DualQuaternion> pose(joints.size());
  for (size_t j = 0; j < joints.size(); ++j) pose[j] = joints[j].dq();

  const auto eval = [&](const VecX& theta) {
    const Camera cam = camera_at(theta);
    const ImageSet rendered = render_image(frame.color.width, frame.color.height, cam,
                                           problem.rig, pose, *problem.scene, problem.render);
    LossTerms terms;
    terms.rgb = rgb_loss(rendered.color, frame.color) * inv_pixels;
    terms.sil = sil_loss(rendered.opacity, frame.silhouette) * inv_pixels;
    require_finite(terms.rgb, "rgb", frame.t);
    require_finite(terms.sil, "silhouette", frame.t);
    return total_loss(problem.weights, terms).total;
  };

  DescentResult result = minimize(eval, VecX::Zero(6), problem.opt, [](VecX&) {}, frame.t);
  if (trace) *trace = result.trace;
  return camera_at(result.theta);
}

}  // namespace deformkit
