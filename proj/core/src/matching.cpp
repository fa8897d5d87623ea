#include "deformkit/matching.hpp"

#include <cmath>

namespace deformkit {
namespace {

// logsumexp over one matrix direction with max subtraction.
VecX logsumexp_rows(const MatX& m) {
  VecX out(m.rows());
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    const double mx = m.row(i).maxCoeff();
    out[i] = mx + std::log((m.row(i).array() - mx).exp().sum());
  }
  return out;
}

MatX plan_from_potentials(const MatX& cost, const VecX& f, const VecX& g, double eps) {
  MatX log_plan = (-cost).rowwise() + g.transpose();
  log_plan.colwise() += f;
  return (log_plan / eps).array().exp();
}

double max_marginal_violation(const MatX& plan) {
  const double a = 1.0 / double(plan.rows());
  const double b = 1.0 / double(plan.cols());
  const double row_dev = (plan.rowwise().sum().array() - a).abs().maxCoeff();
  const double col_dev = (plan.colwise().sum().array() - b).abs().maxCoeff();
  return std::max(row_dev, col_dev);
}

}  // namespace

void validate_features(const MatX& features) {
  if (features.rows() < 1 || features.cols() < 1)
    throw ValidationError("feature matrix is empty");
  if (!features.allFinite()) throw ValidationError("feature matrix contains non-finite values");
  for (Eigen::Index c = 0; c < features.cols(); ++c)
    if (features.col(c).norm() < 1e-12)
      throw ValidationError("feature column " + std::to_string(c) + " has zero norm");
}

Vec3 CanonicalGrid::point(int k) const {
  if (k < 0 || k >= size()) throw ValidationError("grid point index out of range");
  const int i = k % dims[0];
  const int j = (k / dims[0]) % dims[1];
  const int l = k / (dims[0] * dims[1]);
  const int idx[3] = {i, j, l};
  Vec3 p;
  for (int axis = 0; axis < 3; ++axis)
    p[axis] = dims[axis] > 1
                  ? box.min[axis] + idx[axis] * (box.max[axis] - box.min[axis]) / (dims[axis] - 1)
                  : 0.5 * (box.min[axis] + box.max[axis]);
  return p;
}

void CanonicalGrid::validate() const {
  for (int axis = 0; axis < 3; ++axis) {
    if (dims[axis] < 1) throw ValidationError("grid dims must be positive");
    if (dims[axis] > 1 && !(box.min[axis] < box.max[axis]))
      throw ValidationError("grid bounds must have positive extent");
  }
}

MatX correlation(const MatX& fp, const MatX& fq) {
  validate_features(fp);
  validate_features(fq);
  if (fp.rows() != fq.rows())
    throw ValidationError("feature banks have different embedding dimensions");
  MatX a = fp, b = fq;
  for (Eigen::Index c = 0; c < a.cols(); ++c) a.col(c).normalize();
  for (Eigen::Index c = 0; c < b.cols(); ++c) b.col(c).normalize();
  return a.transpose() * b;
}

SinkhornResult sinkhorn(const MatX& cost, double epsilon, int max_iters, double tol) {
  if (!(epsilon > 0.0)) throw ValidationError("sinkhorn: epsilon must be positive");
  if (max_iters < 1) throw ValidationError("sinkhorn: need at least one iteration");
  if (cost.rows() < 1 || cost.cols() < 1) throw ValidationError("sinkhorn: empty cost matrix");
  if (!cost.allFinite()) throw ValidationError("sinkhorn: cost matrix has non-finite entries");

  const Eigen::Index n = cost.rows(), m = cost.cols();
  const double log_a = -std::log(double(n));
  const double log_b = -std::log(double(m));

  VecX f = VecX::Zero(n), g = VecX::Zero(m);
  SinkhornResult result;

  // Annealing ladder: halve from ~1 down to the requested epsilon.
  std::vector<double> ladder{epsilon};
  while (ladder.back() < 0.5) ladder.push_back(ladder.back() * 2.0);

  for (auto level = ladder.rbegin(); level != ladder.rend(); ++level) {
    const double eps = *level;
    const bool final_level = eps == epsilon;
    const int budget = final_level ? max_iters - result.iterations
                                   : std::min(50, max_iters - result.iterations);
    for (int it = 0; it < budget; ++it) {
      // f-update makes row marginals exact, g-update the columns.
      MatX shifted = (-cost).rowwise() + g.transpose();
      f = eps * (VecX::Constant(n, log_a) - logsumexp_rows(shifted / eps));
      shifted = ((-cost).colwise() + f).transpose();
      g = eps * (VecX::Constant(m, log_b) - logsumexp_rows(shifted / eps));
      ++result.iterations;
      if (!f.allFinite() || !g.allFinite())
        throw NumericalError("sinkhorn: potentials diverged");
      const MatX plan = plan_from_potentials(cost, f, g, eps);
      result.marginal_violation = max_marginal_violation(plan);
      if (result.marginal_violation <= tol) {
        if (final_level) {
          result.plan = plan;
          result.converged = true;
          return result;
        }
        break;
      }
      if (final_level && result.iterations >= max_iters) break;
    }
  }
  result.plan = plan_from_potentials(cost, f, g, epsilon);
  result.marginal_violation = max_marginal_violation(result.plan);
  result.converged = result.marginal_violation <= tol;
  return result;
}

std::vector<Vec3> expected_match(const MatX& plan, const CanonicalGrid& grid) {
  grid.validate();
  if (plan.cols() != grid.size())
    throw ValidationError("plan column count does not match grid size");
  if (plan.minCoeff() < 0.0) throw ValidationError("plan has negative entries");
  std::vector<Vec3> out(size_t(plan.rows()), Vec3::Zero());
  for (Eigen::Index i = 0; i < plan.rows(); ++i) {
    const double row_sum = plan.row(i).sum();
    if (row_sum <= 0.0) throw ValidationError("plan row " + std::to_string(i) + " has zero mass");
    Vec3 acc = Vec3::Zero();
    for (int k = 0; k < grid.size(); ++k) acc += plan(i, k) * grid.point(k);
    out[size_t(i)] = acc / row_sum;
  }
  return out;
}

std::vector<Vec3> softargmax_match(const MatX& similarity, double temperature,
                                   const CanonicalGrid& grid) {
  if (!(temperature > 0.0)) throw ValidationError("softargmax: temperature must be positive");
  grid.validate();
  if (similarity.cols() != grid.size())
    throw ValidationError("similarity column count does not match grid size");
  std::vector<Vec3> out(size_t(similarity.rows()), Vec3::Zero());
  for (Eigen::Index i = 0; i < similarity.rows(); ++i) {
    VecX logits = similarity.row(i).transpose() / temperature;
    logits.array() -= logits.maxCoeff();
    VecX w = logits.array().exp();
    w /= w.sum();
    Vec3 acc = Vec3::Zero();
    for (int k = 0; k < grid.size(); ++k) acc += w[k] * grid.point(k);
    out[size_t(i)] = acc;
  }
  return out;
}

VecX row_entropies(const MatX& plan) {
  VecX out(plan.rows());
  for (Eigen::Index i = 0; i < plan.rows(); ++i) {
    const double row_sum = plan.row(i).sum();
    if (row_sum <= 0.0) throw ValidationError("row entropy of an empty distribution");
    double h = 0.0;
    for (Eigen::Index j = 0; j < plan.cols(); ++j) {
      const double p = plan(i, j) / row_sum;
      if (p > 0.0) h -= p * std::log(p);
    }
    out[i] = h;
  }
  return out;
}

MatchLosses match_losses(const std::vector<Vec3>& expected,
                         const std::vector<Vec3>& rendered_surface,
                         const std::vector<Vec2>& reprojections,
                         const std::vector<Vec2>& pixels) {
  if (expected.size() != rendered_surface.size())
    throw ValidationError("match loss: expected and rendered point counts differ");
  if (reprojections.size() != pixels.size())
    throw ValidationError("projection loss: reprojection and pixel counts differ");
  MatchLosses out;
  std::vector<double> terms(expected.size());
  for (size_t i = 0; i < expected.size(); ++i)
    terms[i] = (expected[i] - rendered_surface[i]).squaredNorm();
  out.match = pairwise_sum(terms);
  terms.assign(pixels.size(), 0.0);
  for (size_t i = 0; i < pixels.size(); ++i)
    terms[i] = (reprojections[i] - pixels[i]).squaredNorm();
  out.proj = pairwise_sum(terms);
  return out;
}

}  // namespace deformkit
