#include <doctest.h>
#include <sys/wait.h>
#include <unistd.h>

#include <array>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "deformkit/io.hpp"
#include "oracles.hpp"

using namespace deformkit;
namespace fs = std::filesystem;

namespace {

const std::string kCli = DEFORMKIT_CLI_PATH;

class TempDir {
 public:
  TempDir() {
    dir_ = fs::temp_directory_path() /
           ("deformkit_cli_" + std::to_string(uint64_t(::getpid())) + "_" +
            std::to_string(counter()++));
    fs::create_directories(dir_);
  }
  ~TempDir() { std::error_code ec; fs::remove_all(dir_, ec); }
  std::string path(const std::string& name) const { return (dir_ / name).string(); }

 private:
  static int& counter() { static int n = 0; return n; }
  fs::path dir_;
};

// Runs the CLI with stdout+stderr captured into log_path (discarded if empty).
int run_cli(const std::string& args, const std::string& log_path = "") {
  const std::string sink = log_path.empty() ? "/dev/null" : log_path;
  const std::string cmd = "\"" + kCli + "\" " + args + " > \"" + sink + "\" 2>&1";
  const int status = std::system(cmd.c_str());
  REQUIRE(status != -1);
  return WIFEXITED(status) ? WEXITSTATUS(status) : -2;
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in.good());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  out << text;
}

double json_number(const std::string& text, const std::string& key) {
  const auto pos = text.find("\"" + key + "\"");
  REQUIRE(pos != std::string::npos);
  const auto colon = text.find(':', pos);
  REQUIRE(colon != std::string::npos);
  return std::stod(text.substr(colon + 1));
}

struct Workspace {
  TempDir tmp;

  std::string scene() const { return tmp.path("scene.json"); }
  std::string camera() const { return tmp.path("camera.json"); }
  std::string rig() const { return tmp.path("rig.json"); }
  std::string pose2() const { return tmp.path("pose2.json"); }

  Workspace() {
    write_text(scene(),
               R"({"primitives":[{"type":"sphere","center":[0,0,0],"radius":1.0,)"
               R"("color":[0.9,0.1,0.1]}]})");
    Camera cam;
    cam.extrinsic.translation = Vec3(0.0, 0.0, 4.0);  // camera 4 in front, looking +z
    cam.fx = cam.fy = 32.0;
    cam.cx = cam.cy = 16.0;
    write_camera_json(cam, camera());
    Rig r;
    r.joints.resize(1);
    write_rig_json(r, rig());
    write_pose_json(PoseTable::identity(1, {0, 1}), pose2());
  }
};

}  // namespace

TEST_CASE("help exits cleanly") {
  CHECK(run_cli("--help") == 0);
  CHECK(run_cli("render --help") == 0);
}

TEST_CASE("argument mistakes are validation failures") {
  TempDir tmp;
  CHECK(run_cli("--definitely-not-a-flag") == 2);
  CHECK(run_cli("frobnicate") == 2);
  CHECK(run_cli("render --scene only.json") == 2);  // missing required options
  const std::string log = tmp.path("log.txt");
  CHECK(run_cli("skin --mesh /nonexistent.obj --rig /nonexistent.json --pose /nonexistent.json"
                " --out /tmp/unused.obj",
                log) == 2);
  CHECK(slurp(log).find("error: validation:") != std::string::npos);
}

TEST_CASE("collapse demo reports the straight-arm twist collapse") {
  TempDir tmp;
  const std::string csv = tmp.path("twist.csv");
  REQUIRE(run_cli("collapse-demo --angles 0,90,180 --mode twist --out \"" + csv + "\"") == 0);
  std::ifstream in(csv);
  std::string header;
  std::getline(in, header);
  CHECK(header == "angle_deg,lbs_mid_radius,dbs_mid_radius,lbs_volume,dbs_volume");
  double angle, lbs, dbs, lbs_vol, dbs_vol;
  int rows = 0;
  for (std::string line; std::getline(in, line); ++rows) {
    REQUIRE(std::sscanf(line.c_str(), "%lf,%lf,%lf,%lf,%lf", &angle, &lbs, &dbs, &lbs_vol,
                        &dbs_vol) == 5);
    CHECK(std::abs(dbs - 1.0) <= 1e-6);  // rigid blending preserves the ring
    if (angle == 0.0) CHECK(std::abs(lbs - 1.0) <= 1e-9);
    if (angle == 90.0) CHECK(std::abs(lbs - std::sqrt(0.5)) <= 1e-6);
    if (angle == 180.0) {
      CHECK(std::abs(lbs) <= 1e-9);           // averaged rotations cancel
      CHECK(lbs_vol <= 0.5 * dbs_vol);        // the pinch destroys volume
    }
  }
  CHECK(rows == 3);
}

TEST_CASE("bend mode reports the candy-wrapper-free hinge") {
  TempDir tmp;
  const std::string csv = tmp.path("bend.csv");
  REQUIRE(run_cli("collapse-demo --angles 90 --mode bend --out \"" + csv + "\"") == 0);
  std::ifstream in(csv);
  std::string line;
  std::getline(in, line);  // header
  std::getline(in, line);
  double angle, lbs, dbs, lv, dv;
  REQUIRE(std::sscanf(line.c_str(), "%lf,%lf,%lf,%lf,%lf", &angle, &lbs, &dbs, &lv, &dv) == 5);
  CHECK(std::abs(lbs - std::sqrt(2.0) / 2.0) <= 1e-6);
  CHECK(std::abs(dbs - 1.0) <= 1e-6);
}

TEST_CASE("skinning with an identity pose is a byte-exact pass-through") {
  Workspace ws;
  Mesh tet;
  tet.vertices = {Vec3(0, 0, 0), Vec3(1, 0, 0), Vec3(0, 1, 0), Vec3(0, 0, 1)};
  tet.faces = {{0, 2, 1}, {0, 1, 3}, {0, 3, 2}, {1, 2, 3}};
  const std::string in_path = ws.tmp.path("tet.obj");
  const std::string out_path = ws.tmp.path("skinned.obj");
  write_obj(tet, in_path);
  REQUIRE(run_cli("skin --mesh \"" + in_path + "\" --rig \"" + ws.rig() + "\" --pose \"" +
                  ws.pose2() + "\" --method dbs --frame 0 --out \"" + out_path + "\"") == 0);
  CHECK(slurp(out_path) == slurp(in_path));
  REQUIRE(run_cli("skin --mesh \"" + in_path + "\" --rig \"" + ws.rig() + "\" --pose \"" +
                  ws.pose2() + "\" --method lbs --frame 0 --out \"" + out_path + "\"") == 0);
  CHECK(slurp(out_path) == slurp(in_path));
}

TEST_CASE("render writes deterministic image files") {
  Workspace ws;
  const std::string base = "render --scene \"" + ws.scene() + "\" --camera \"" + ws.camera() +
                           "\" --rig \"" + ws.rig() + "\" --pose \"" + ws.pose2() +
                           "\" --width 32 --height 32 --samples 64 --near 2 --far 6";
  const std::string p1 = ws.tmp.path("a");
  const std::string p2 = ws.tmp.path("b");
  REQUIRE(run_cli(base + " --channels color,opacity,depth --out-prefix \"" + p1 + "\"") == 0);
  REQUIRE(run_cli(base + " --channels color,opacity,depth --out-prefix \"" + p2 + "\"") == 0);
  for (const char* suffix : {"_color.ppm", "_opacity.pgm", "_depth.pgm"}) {
    CAPTURE(suffix);
    REQUIRE(fs::exists(p1 + suffix));
    CHECK(slurp(p1 + suffix) == slurp(p2 + suffix));
  }
  const Image color = read_ppm(p1 + "_color.ppm");
  const Image opacity = read_pgm(p1 + "_opacity.pgm");
  CHECK(color.at(16, 16, 0) > 0.5);            // red sphere fills the center
  CHECK(color.at(16, 16, 0) > color.at(16, 16, 1));
  CHECK(opacity.at(16, 16, 0) > 0.95);
  CHECK(opacity.at(0, 0, 0) == 0.0);           // corner ray misses
}

TEST_CASE("flow rendering needs the next pose frame") {
  Workspace ws;
  const std::string one_frame = ws.tmp.path("pose1.json");
  write_pose_json(PoseTable::identity(1, {0}), one_frame);
  const std::string base = "render --scene \"" + ws.scene() + "\" --camera \"" + ws.camera() +
                           "\" --rig \"" + ws.rig() + "\" --width 16 --height 16 --samples 32" +
                           " --near 2 --far 6 --channels flow --out-prefix \"" +
                           ws.tmp.path("f") + "\"";
  CHECK(run_cli(base + " --pose \"" + one_frame + "\"") == 2);
  REQUIRE(run_cli(base + " --pose \"" + ws.pose2() + "\"") == 0);

  Image flow(16, 16, 2), valid(16, 16, 1);
  read_flow_csv(ws.tmp.path("f") + "_flow.csv", flow, valid);
  int n_valid = 0;
  double max_flow = 0.0;
  for (int y = 0; y < 16; ++y)
    for (int x = 0; x < 16; ++x)
      if (valid.at(x, y, 0) > 0.5) {
        ++n_valid;
        max_flow = std::max({max_flow, std::abs(flow.at(x, y, 0)), std::abs(flow.at(x, y, 1))});
      }
  CHECK(n_valid > 10);
  CHECK(max_flow <= 1e-6);  // identical poses: the scene does not move
}

TEST_CASE("match writes a plan with uniform marginals") {
  Workspace ws;
  oracles::Rng rng(121);
  MatX fa(4, 3), fb(4, 8);
  for (int r = 0; r < 4; ++r) {
    for (int c = 0; c < 3; ++c) fa(r, c) = rng.range(0.1, 1.0);
    for (int c = 0; c < 8; ++c) fb(r, c) = rng.range(0.1, 1.0);
  }
  write_features(fa, ws.tmp.path("fa.csv"));
  write_features(fb, ws.tmp.path("fb.csv"));
  write_text(ws.tmp.path("grid.json"), R"({"dims":[2,2,2],"bounds":[-1,-1,-1,1,1,1]})");
  const std::string plan_path = ws.tmp.path("plan.csv");
  const std::string log = ws.tmp.path("match.log");
  REQUIRE(run_cli("match --features-a \"" + ws.tmp.path("fa.csv") + "\" --features-b \"" +
                  ws.tmp.path("fb.csv") + "\" --grid \"" + ws.tmp.path("grid.json") +
                  "\" --baseline softargmax --out \"" + plan_path + "\"",
                  log) == 0);
  const std::string out = slurp(log);
  CHECK(out.find("match converged=1") != std::string::npos);
  CHECK(out.find("baseline=softargmax") != std::string::npos);

  std::ifstream in(plan_path);
  std::string header;
  std::getline(in, header);
  CHECK(header == "row,col,mass");
  std::array<double, 3> row_sum{};
  std::array<double, 8> col_sum{};
  int entries = 0;
  for (std::string line; std::getline(in, line); ++entries) {
    int i, j;
    double mass;
    REQUIRE(std::sscanf(line.c_str(), "%d,%d,%lf", &i, &j, &mass) == 3);
    row_sum[size_t(i)] += mass;
    col_sum[size_t(j)] += mass;
  }
  CHECK(entries == 24);
  for (double s : row_sum) CHECK(std::abs(s - 1.0 / 3.0) <= 1e-6);
  for (double s : col_sum) CHECK(std::abs(s - 1.0 / 8.0) <= 1e-6);
}

TEST_CASE("an iteration-starved transport solve is a numerical failure") {
  Workspace ws;
  oracles::Rng rng(122);
  MatX fa(4, 6), fb(4, 8);
  for (int r = 0; r < 4; ++r) {
    for (int c = 0; c < 6; ++c) fa(r, c) = rng.range(0.1, 1.0);
    for (int c = 0; c < 8; ++c) fb(r, c) = rng.range(0.1, 1.0);
  }
  write_features(fa, ws.tmp.path("fa.csv"));
  write_features(fb, ws.tmp.path("fb.csv"));
  write_text(ws.tmp.path("grid.json"), R"({"dims":[2,2,2],"bounds":[-1,-1,-1,1,1,1]})");
  const std::string log = ws.tmp.path("match.log");
  CHECK(run_cli("match --features-a \"" + ws.tmp.path("fa.csv") + "\" --features-b \"" +
                ws.tmp.path("fb.csv") + "\" --grid \"" + ws.tmp.path("grid.json") +
                "\" --epsilon 1e-5 --iters 2 --out \"" + ws.tmp.path("plan.csv") + "\"",
                log) == 3);
  CHECK(slurp(log).find("error: numerical:") != std::string::npos);
}

TEST_CASE("extract-mesh and metrics close the loop at a perfect score") {
  Workspace ws;
  const std::string mesh_path = ws.tmp.path("sphere.obj");
  REQUIRE(run_cli("extract-mesh --scene \"" + ws.scene() + "\" --res 20 --out \"" + mesh_path +
                  "\"") == 0);
  const Mesh mesh = read_obj(mesh_path);
  CHECK(mesh.vertices.size() > 100);
  CHECK(!mesh.faces.empty());

  const std::string metrics_path = ws.tmp.path("metrics.json");
  REQUIRE(run_cli("metrics --pred \"" + mesh_path + "\" --gt \"" + mesh_path +
                  "\" --samples 2000 --seed 9 --out \"" + metrics_path + "\"") == 0);
  const std::string metrics = slurp(metrics_path);
  CHECK(json_number(metrics, "chamfer_sum") == 0.0);
  CHECK(json_number(metrics, "chamfer_mean") == 0.0);
  CHECK(json_number(metrics, "f_score_2pct") == doctest::Approx(100.0).epsilon(1e-9));
  CHECK(json_number(metrics, "n_samples") == 2000);
  CHECK(json_number(metrics, "seed") == 9);
}

TEST_CASE("fit runs end to end from problem files") {
  Workspace ws;
  // Render the targets the fit should reproduce.
  const std::string prefix = ws.tmp.path("target");
  REQUIRE(run_cli("render --scene \"" + ws.scene() + "\" --camera \"" + ws.camera() +
                  "\" --rig \"" + ws.rig() + "\" --pose \"" + ws.pose2() +
                  "\" --width 16 --height 16 --samples 24 --near 2 --far 6" +
                  " --channels color,opacity --out-prefix \"" + prefix + "\"") == 0);
  write_text(ws.tmp.path("fit.json"), R"({
    "scene": "scene.json",
    "rig": "rig.json",
    "init_pose": "pose2.json",
    "render": {"samples": 24, "near": 2.0, "far": 6.0},
    "weights": {"flow": 0.0, "cycle": 0.0, "eikonal": 0.0},
    "optimizer": {"iterations": 2, "step": 0.05},
    "frames": [{"t": 0, "camera": "camera.json",
                "color": "target_color.ppm", "silhouette": "target_opacity.pgm"}]
  })");
  const std::string fitted = ws.tmp.path("fitted.json");
  const std::string trace = ws.tmp.path("trace.csv");
  const std::string log = ws.tmp.path("fit.log");
  REQUIRE(run_cli("fit --problem \"" + ws.tmp.path("fit.json") + "\" --out \"" + fitted +
                  "\" --trace \"" + trace + "\"",
                  log) == 0);
  CHECK(slurp(log).find("fit frame=0 loss=") != std::string::npos);
  const PoseTable result = read_pose_json(fitted);
  CHECK(result.has_frame(0));
  CHECK(result.frame(0).joints.size() == 1);
  std::ifstream in(trace);
  std::string header;
  std::getline(in, header);
  CHECK(header == "frame,iteration,loss,grad_norm,step");
}

TEST_CASE("thread override is accepted") {
  TempDir tmp;
  const std::string csv = tmp.path("t.csv");
  CHECK(run_cli("--threads 2 collapse-demo --angles 45 --mode twist --out \"" + csv + "\"") == 0);
  CHECK(fs::exists(csv));
}
