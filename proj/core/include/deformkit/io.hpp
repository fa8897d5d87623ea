#pragma once

#include <memory>
#include <string>
#include <vector>

#include "deformkit/deform.hpp"
#include "deformkit/dualquat.hpp"
#include "deformkit/field.hpp"
#include "deformkit/fit.hpp"
#include "deformkit/matching.hpp"
#include "deformkit/rig.hpp"
#include "deformkit/types.hpp"

namespace deformkit {

// Meshes. Vertices are written with 9 significant digits; faces are
// triangles (polygon faces fan-triangulate on read).
Mesh read_obj(const std::string& path);
void write_obj(const Mesh& mesh, const std::string& path);

// Binary PPM (P6) for color, PGM (P5) for single channels, 8-bit. Values
// are clamped to [0,1] after dividing by scale.
void write_ppm(const Image& color, const std::string& path);
Image read_ppm(const std::string& path);
void write_pgm(const Image& image, int channel, const std::string& path, double scale = 1.0);
Image read_pgm(const std::string& path);

// Flow as CSV with header x,y,fx,fy; only valid pixels are written. Reading
// fills pre-sized images, marking listed pixels valid.
void write_flow_csv(const Image& flow, const Image& valid, const std::string& path);
void read_flow_csv(const std::string& path, Image& flow, Image& valid);

// Feature banks: .csv as a dense matrix literal, anything else as raw
// little-endian float32 with a JSON sidecar at <path>.json holding
// {"dims": [rows, cols], "layout": "column-major"|"row-major"}.
MatX read_features(const std::string& path);
void write_features(const MatX& features, const std::string& path);

// Transport plans as CSV with header row,col,mass (all entries).
void write_plan_csv(const MatX& plan, const std::string& path);

// Raw little-endian float32 buffers (x-fastest for grids).
std::vector<float> read_raw_f32(const std::string& path);
void write_raw_f32(const std::vector<float>& values, const std::string& path);

// JSON entities. Readers validate and throw ValidationError on malformed
// input; writers emit stable key order.
Rig read_rig_json(const std::string& path);
void write_rig_json(const Rig& rig, const std::string& path);
PoseTable read_pose_json(const std::string& path);
void write_pose_json(const PoseTable& pose, const std::string& path);
Camera read_camera_json(const std::string& path);
void write_camera_json(const Camera& cam, const std::string& path);
std::shared_ptr<SdfScene> read_scene_json(const std::string& path);
CanonicalGrid read_grid_json(const std::string& path);
FitProblem read_fit_problem(const std::string& path);
void write_metrics_json(const std::string& path, double chamfer_sum, double chamfer_mean,
                        double f_score_2pct, int n_samples, uint64_t seed);
void write_loss_trace_csv(const std::vector<FitTraceRow>& trace, const std::string& path);

// Dual quaternions as {"real": [w,x,y,z], "dual": [w,x,y,z]}.
std::string dq_to_json_string(const DualQuaternion& dq);
DualQuaternion dq_from_json_string(const std::string& text);

}  // namespace deformkit
