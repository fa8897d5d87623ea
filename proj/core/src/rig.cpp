#include "deformkit/rig.hpp"

#include <algorithm>
#include <cmath>
#include <random>

namespace deformkit {

void Rig::validate() const {
  if (joints.empty()) throw ValidationError("rig must have at least one joint");
  for (size_t j = 0; j < joints.size(); ++j) {
    const Joint& joint = joints[j];
    const Mat3 err = joint.orientation.transpose() * joint.orientation - Mat3::Identity();
    if (err.cwiseAbs().maxCoeff() > 1e-9)
      throw ValidationError("joint " + std::to_string(j) + ": orientation is not orthonormal");
    if ((joint.precision.array() <= 0.0).any())
      throw ValidationError("joint " + std::to_string(j) + ": precision entries must be positive");
  }
}

Rig Rig::default_init(int joint_count, uint64_t seed, double precision) {
  if (joint_count < 1) throw ValidationError("rig must have at least one joint");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Rig rig;
  rig.joints.resize(joint_count);
  for (Joint& j : rig.joints) {
    j.center = Vec3(u(rng), u(rng), u(rng));
    j.orientation = Mat3::Identity();
    j.precision = Vec3::Constant(precision);
  }
  return rig;
}

const PoseTable::Frame& PoseTable::frame(int t) const {
  for (const Frame& f : frames)
    if (f.t == t) return f;
  throw ValidationError("pose table has no frame " + std::to_string(t));
}

bool PoseTable::has_frame(int t) const {
  return std::any_of(frames.begin(), frames.end(), [t](const Frame& f) { return f.t == t; });
}

std::vector<DualQuaternion> PoseTable::dqs(int t) const {
  const Frame& f = frame(t);
  std::vector<DualQuaternion> out;
  out.reserve(f.joints.size());
  for (const PoseParam& p : f.joints) out.push_back(p.dq());
  return out;
}

PoseTable PoseTable::identity(int joint_count, const std::vector<int>& times) {
  PoseTable table;
  for (int t : times) {
    Frame f;
    f.t = t;
    f.joints.resize(joint_count);
    table.frames.push_back(std::move(f));
  }
  return table;
}

VecX mahalanobis_scores(const Vec3& p, const Rig& rig) {
  const int J = rig.joint_count();
  VecX scores(J);
  for (int j = 0; j < J; ++j) {
    const Joint& joint = rig.joints[j];
    const Vec3 local = joint.orientation * (p - joint.center);
    scores[j] = local.dot(joint.precision.asDiagonal() * local);
  }
  return scores;
}

VecX skin_weights(const Vec3& p, const Rig& rig, const VecX& bias) {
  const int J = rig.joint_count();
  if (bias.size() != 0 && bias.size() != J)
    throw ValidationError("skinning bias length does not match joint count");
  // Softmax over -score (+ bias); closer joints get larger weights.
  VecX logits = -mahalanobis_scores(p, rig);
  if (bias.size() == J) logits += bias;
  const double m = logits.maxCoeff();
  VecX w = (logits.array() - m).exp();
  w /= w.sum();
  return w;
}

Rig posed_rig(const Rig& rig, const std::vector<DualQuaternion>& pose) {
  if (pose.size() != rig.joints.size())
    throw ValidationError("pose length does not match rig joint count");
  Rig moved = rig;
  for (size_t j = 0; j < moved.joints.size(); ++j) {
    const RigidTransform rt = dq_to_rigid(pose[j]);
    Joint& joint = moved.joints[j];
    joint.center = rt.apply(joint.center);
    joint.orientation = joint.orientation * rt.rotation.transpose();
  }
  return moved;
}

}  // namespace deformkit
