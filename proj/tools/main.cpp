#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "deformkit/field.hpp"
#include "deformkit/fit.hpp"
#include "deformkit/io.hpp"
#include "deformkit/marching_cubes.hpp"
#include "deformkit/matching.hpp"
#include "deformkit/metrics.hpp"
#include "deformkit/render.hpp"
#include "deformkit/rig.hpp"
#include "deformkit/skinning.hpp"

namespace {

using namespace deformkit;

struct SkinArgs {
  std::string mesh, rig, pose, method = "dbs", out;
  int frame = 0;
};

void run_skin(const SkinArgs& a) {
  if (a.method != "lbs" && a.method != "dbs")
    throw ValidationError("skin: method must be lbs or dbs");
  const Mesh mesh = read_obj(a.mesh);
  const Rig rig = read_rig_json(a.rig);
  const PoseTable pose = read_pose_json(a.pose);
  const Mesh out = skin_mesh(mesh, rig, pose.dqs(a.frame),
                             a.method == "lbs" ? SkinMethod::Lbs : SkinMethod::Dbs);
  write_obj(out, a.out);
  std::printf("skin method=%s frame=%d vertices=%zu faces=%zu out=%s\n", a.method.c_str(),
              a.frame, out.vertices.size(), out.faces.size(), a.out.c_str());
}

struct CollapseArgs {
  std::vector<double> angles;
  std::string mode = "twist", out;
};

void run_collapse(const CollapseArgs& a) {
  if (a.mode != "bend" && a.mode != "twist")
    throw ValidationError("collapse-demo: mode must be bend or twist");
  const auto rows =
      collapse_report(a.angles, a.mode == "bend" ? CollapseMode::Bend : CollapseMode::Twist);
  std::ofstream out(a.out);
  if (!out) throw ValidationError("cannot write " + a.out);
  out << "angle_deg,lbs_mid_radius,dbs_mid_radius,lbs_volume,dbs_volume\n";
  char buf[192];
  for (const CollapseRow& r : rows) {
    std::snprintf(buf, sizeof buf, "%.9g,%.9g,%.9g,%.9g,%.9g\n", r.angle_deg, r.lbs_mid_radius,
                  r.dbs_mid_radius, r.lbs_volume, r.dbs_volume);
    out << buf;
    std::printf("angle=%g lbs_mid_radius=%.6g dbs_mid_radius=%.6g\n", r.angle_deg,
                r.lbs_mid_radius, r.dbs_mid_radius);
  }
  out.flush();
  if (!out.good()) throw ValidationError("write to " + a.out + " failed");
}

struct RenderArgs {
  std::string scene, camera, rig, pose, channels = "color,opacity,depth", out_prefix;
  int frame = 0, width = 64, height = 64;
  RenderConfig cfg;
  bool no_filter = false;
};

void run_render(const RenderArgs& a) {
  std::vector<std::string> channels;
  {
    std::istringstream ss(a.channels);
    std::string c;
    while (std::getline(ss, c, ',')) channels.push_back(c);
  }
  bool want_flow = false;
  for (const std::string& c : channels) {
    if (c != "color" && c != "opacity" && c != "depth" && c != "flow")
      throw ValidationError("render: unknown channel '" + c + "'");
    want_flow |= c == "flow";
  }
  if (channels.empty()) throw ValidationError("render: no channels requested");

  const auto scene = read_scene_json(a.scene);
  const Camera cam = read_camera_json(a.camera);
  const Rig rig = read_rig_json(a.rig);
  const PoseTable pose = read_pose_json(a.pose);
  RenderConfig cfg = a.cfg;
  cfg.texture_filtering = !a.no_filter;

  ImageSet images;
  if (want_flow) {
    if (!pose.has_frame(a.frame + 1))
      throw ValidationError("render: channel flow needs pose frame " +
                            std::to_string(a.frame + 1));
    images = render_image_with_flow(a.width, a.height, cam, cam, pose.dqs(a.frame),
                                    pose.dqs(a.frame + 1), rig, *scene, cfg);
  } else {
    images = render_image(a.width, a.height, cam, rig, pose.dqs(a.frame), *scene, cfg);
  }

  for (const std::string& c : channels) {
    if (c == "color") write_ppm(images.color, a.out_prefix + "_color.ppm");
    if (c == "opacity") write_pgm(images.opacity, 0, a.out_prefix + "_opacity.pgm");
    if (c == "depth") write_pgm(images.depth, 0, a.out_prefix + "_depth.pgm", cfg.far);
    if (c == "flow") write_flow_csv(images.flow, images.flow_valid, a.out_prefix + "_flow.csv");
  }
  std::printf("render frame=%d size=%dx%d channels=%s out_prefix=%s\n", a.frame, a.width,
              a.height, a.channels.c_str(), a.out_prefix.c_str());
}

struct MatchArgs {
  std::string features_a, features_b, grid, baseline = "none", out;
  double epsilon = 0.05, temperature = 0.1;
  int iters = 1000;
};

void run_match(const MatchArgs& a) {
  if (a.baseline != "none" && a.baseline != "softargmax")
    throw ValidationError("match: baseline must be softargmax or none");
  const MatX fa = read_features(a.features_a);
  const MatX fb = read_features(a.features_b);
  if (fa.rows() != fb.rows())
    throw ValidationError("match: feature dimensionality differs between inputs");
  const CanonicalGrid grid = read_grid_json(a.grid);
  if (grid.size() != int(fb.cols()))
    throw ValidationError("match: grid size " + std::to_string(grid.size()) +
                          " does not match feature-b count " + std::to_string(fb.cols()));

  const MatX similarity = correlation(fa, fb);
  const MatX cost = MatX::Ones(similarity.rows(), similarity.cols()) - similarity;
  const SinkhornResult result = sinkhorn(cost, a.epsilon, a.iters);
  if (!result.converged)
    throw NumericalError("match: transport solve did not converge in " +
                         std::to_string(a.iters) + " iterations");
  write_plan_csv(result.plan, a.out);
  const std::vector<Vec3> matched = expected_match(result.plan, grid);
  (void)matched;

  const VecX ot_entropy = row_entropies(result.plan);
  std::printf("match converged=1 iterations=%d marginal_violation=%.3g mean_row_entropy=%.6g\n",
              result.iterations, result.marginal_violation, ot_entropy.mean());
  if (a.baseline == "softargmax") {
    MatX soft(similarity.rows(), similarity.cols());
    for (Eigen::Index i = 0; i < similarity.rows(); ++i) {
      const VecX row = similarity.row(i).transpose() / a.temperature;
      const VecX ex = (row.array() - row.maxCoeff()).exp();
      soft.row(i) = (ex / ex.sum()).transpose();
    }
    const VecX base_entropy = row_entropies(soft);
    std::printf("baseline=softargmax temperature=%g mean_row_entropy=%.6g\n", a.temperature,
                base_entropy.mean());
  }
}

struct FitArgs {
  std::string problem, out, trace;
};

void run_fit(const FitArgs& a) {
  const FitProblem problem = read_fit_problem(a.problem);
  const FitResult result = fit_pose(problem);
  write_pose_json(result.pose, a.out);
  if (!a.trace.empty()) write_loss_trace_csv(result.trace, a.trace);
  for (size_t i = 0; i < result.reports.size(); ++i)
    std::printf("fit frame=%d loss=%.9g\n", problem.frames[i].t, result.reports[i].total);
}

struct MetricsArgs {
  std::string pred, gt, out;
  int samples = 10000;
  uint64_t seed = 42;
};

void run_metrics(const MetricsArgs& a) {
  const Mesh pred = read_obj(a.pred);
  const Mesh gt = read_obj(a.gt);
  const std::vector<Vec3> p = sample_surface(pred, a.samples, a.seed);
  const std::vector<Vec3> g = sample_surface(gt, a.samples, a.seed);
  const double cd_sum = chamfer(p, g, ChamferMode::Sum);
  const double cd_mean = chamfer(p, g, ChamferMode::Mean);
  const double f = f_score(p, g, 0.02);
  write_metrics_json(a.out, cd_sum, cd_mean, f, a.samples, a.seed);
  std::printf("metrics chamfer_sum=%.9g chamfer_mean=%.9g f_score_2pct=%.9g samples=%d seed=%llu\n",
              cd_sum, cd_mean, f, a.samples, static_cast<unsigned long long>(a.seed));
}

struct ExtractArgs {
  std::string scene, out;
  int res = 64;
};

void run_extract(const ExtractArgs& a) {
  const auto scene = read_scene_json(a.scene);
  const Mesh mesh = extract_mesh(*scene, a.res);
  write_obj(mesh, a.out);
  std::printf("extract-mesh res=%d vertices=%zu faces=%zu out=%s\n", a.res, mesh.vertices.size(),
              mesh.faces.size(), a.out.c_str());
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"deformkit: dual quaternion skinning, SDF volume rendering, transport matching"};
  app.require_subcommand(1);
  int threads = 0;
  app.add_option("--threads", threads, "worker thread count (0 keeps the runtime default)");

  SkinArgs skin;
  CLI::App* skin_cmd = app.add_subcommand("skin", "Deform an OBJ mesh with a rig and a pose");
  skin_cmd->add_option("--mesh", skin.mesh, "input OBJ")->required();
  skin_cmd->add_option("--rig", skin.rig, "rig JSON")->required();
  skin_cmd->add_option("--pose", skin.pose, "pose table JSON")->required();
  skin_cmd->add_option("--method", skin.method, "lbs or dbs");
  skin_cmd->add_option("--frame", skin.frame, "pose frame time");
  skin_cmd->add_option("--out", skin.out, "output OBJ")->required();

  CollapseArgs collapse;
  CLI::App* collapse_cmd =
      app.add_subcommand("collapse-demo", "Sweep the two-joint cylinder and report mid radii");
  collapse_cmd->add_option("--angles", collapse.angles, "sweep angles in degrees")
      ->required()
      ->delimiter(',');
  collapse_cmd->add_option("--mode", collapse.mode, "bend or twist");
  collapse_cmd->add_option("--out", collapse.out, "output CSV")->required();

  RenderArgs render;
  CLI::App* render_cmd = app.add_subcommand("render", "Volume-render a posed scene");
  render_cmd->add_option("--scene", render.scene, "scene JSON")->required();
  render_cmd->add_option("--camera", render.camera, "camera JSON")->required();
  render_cmd->add_option("--rig", render.rig, "rig JSON")->required();
  render_cmd->add_option("--pose", render.pose, "pose table JSON")->required();
  render_cmd->add_option("--frame", render.frame, "pose frame time");
  render_cmd->add_option("--width", render.width, "image width");
  render_cmd->add_option("--height", render.height, "image height");
  render_cmd->add_option("--channels", render.channels, "comma list: color,opacity,depth,flow");
  render_cmd->add_option("--out-prefix", render.out_prefix, "output path prefix")->required();
  render_cmd->add_option("--samples", render.cfg.samples, "ray sample count");
  render_cmd->add_option("--near", render.cfg.near, "near plane");
  render_cmd->add_option("--far", render.cfg.far, "far plane");
  render_cmd->add_option("--beta", render.cfg.beta, "density sharpness");
  render_cmd->add_option("--gamma", render.cfg.gamma, "texture filter scale");
  render_cmd->add_option("--lambda", render.cfg.lambda, "texture filter steepness");
  render_cmd->add_option("--amp", render.cfg.amp, "density amplitude (0 uses 1/beta)");
  render_cmd->add_flag("--no-texture-filter", render.no_filter, "disable texture filtering");
  render_cmd->add_flag("--jitter", render.cfg.jitter, "stratified jitter instead of midpoints");
  render_cmd->add_option("--seed", render.cfg.seed, "jitter seed");

  MatchArgs match;
  CLI::App* match_cmd = app.add_subcommand("match", "Entropic transport between feature sets");
  match_cmd->add_option("--features-a", match.features_a, "pixel features (csv or raw+json)")
      ->required();
  match_cmd->add_option("--features-b", match.features_b, "grid features (csv or raw+json)")
      ->required();
  match_cmd->add_option("--grid", match.grid, "canonical grid JSON")->required();
  match_cmd->add_option("--epsilon", match.epsilon, "entropic regularization");
  match_cmd->add_option("--iters", match.iters, "iteration cap");
  match_cmd->add_option("--baseline", match.baseline, "softargmax or none");
  match_cmd->add_option("--temperature", match.temperature, "softargmax temperature");
  match_cmd->add_option("--out", match.out, "plan CSV")->required();

  FitArgs fit;
  CLI::App* fit_cmd = app.add_subcommand("fit", "Recover pose parameters from rendered targets");
  fit_cmd->add_option("--problem", fit.problem, "fit problem JSON")->required();
  fit_cmd->add_option("--out", fit.out, "fitted pose JSON")->required();
  fit_cmd->add_option("--trace", fit.trace, "loss trace CSV");

  MetricsArgs metrics;
  CLI::App* metrics_cmd = app.add_subcommand("metrics", "Chamfer and F-score between two meshes");
  metrics_cmd->add_option("--pred", metrics.pred, "predicted OBJ")->required();
  metrics_cmd->add_option("--gt", metrics.gt, "reference OBJ")->required();
  metrics_cmd->add_option("--samples", metrics.samples, "surface sample count");
  metrics_cmd->add_option("--seed", metrics.seed, "sampling seed");
  metrics_cmd->add_option("--out", metrics.out, "metrics JSON")->required();

  ExtractArgs extract;
  CLI::App* extract_cmd = app.add_subcommand("extract-mesh", "Isosurface a scene to OBJ");
  extract_cmd->add_option("--scene", extract.scene, "scene JSON")->required();
  extract_cmd->add_option("--res", extract.res, "lattice resolution per axis");
  extract_cmd->add_option("--out", extract.out, "output OBJ")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);
    std::cerr << "error: validation: " << e.what() << "\n";
    return 2;
  }

  try {
#ifdef _OPENMP
    if (threads > 0) omp_set_num_threads(threads);
#endif
    if (app.got_subcommand(skin_cmd)) run_skin(skin);
    if (app.got_subcommand(collapse_cmd)) run_collapse(collapse);
    if (app.got_subcommand(render_cmd)) run_render(render);
    if (app.got_subcommand(match_cmd)) run_match(match);
    if (app.got_subcommand(fit_cmd)) run_fit(fit);
    if (app.got_subcommand(metrics_cmd)) run_metrics(metrics);
    if (app.got_subcommand(extract_cmd)) run_extract(extract);
  } catch (const ValidationError& e) {
    std::cerr << "error: validation: " << e.what() << "\n";
    return 2;
  } catch (const NumericalError& e) {
    std::cerr << "error: numerical: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: validation: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
