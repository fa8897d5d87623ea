#include "deformkit/io.hpp"

#include <json.hpp>

#include <cmath>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace deformkit {
namespace {

using ordered_json = nlohmann::ordered_json;
namespace fs = std::filesystem;

std::string read_text(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot open " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

ordered_json parse_json_file(const std::string& path) {
  try {
    return ordered_json::parse(read_text(path));
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(path + ": " + e.what());
  }
}

std::ofstream open_out(const std::string& path, bool binary = false) {
  std::ofstream out(path, binary ? std::ios::binary : std::ios::out);
  if (!out) throw ValidationError("cannot write " + path);
  return out;
}

void finish(std::ofstream& out, const std::string& path) {
  out.flush();
  if (!out.good()) throw ValidationError("write to " + path + " failed");
}

Vec3 vec3_from(const ordered_json& j, const std::string& what) {
  if (!j.is_array() || j.size() != 3)
    throw ValidationError(what + " must be an array of 3 numbers");
  return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>()};
}

Mat3 mat3_from(const ordered_json& j, const std::string& what) {
  if (!j.is_array() || j.size() != 9)
    throw ValidationError(what + " must be an array of 9 numbers, row-major");
  Mat3 m;
  for (int r = 0; r < 3; ++r)
    for (int c = 0; c < 3; ++c) m(r, c) = j[size_t(3 * r + c)].get<double>();
  return m;
}

ordered_json vec3_json(const Vec3& v) { return ordered_json::array({v.x(), v.y(), v.z()}); }

ordered_json mat3_json(const Mat3& m) {
  ordered_json j = ordered_json::array();
  for (int r = 0; r < 3; ++r)
    for (int c = 0; c < 3; ++c) j.push_back(m(r, c));
  return j;
}

std::string resolve(const std::string& base_file, const std::string& rel) {
  return (fs::path(base_file).parent_path() / rel).string();
}

// P5/P6 headers: magic, width, height, maxval, separated by whitespace with
// # comments, then a single whitespace byte before the raster.
struct PnmHeader {
  std::string magic;
  int width = 0, height = 0, maxval = 0;
  size_t data_offset = 0;
};

PnmHeader parse_pnm_header(const std::string& bytes, const std::string& path) {
  PnmHeader h;
  size_t pos = 0;
  const auto next_token = [&]() {
    while (pos < bytes.size()) {
      if (std::isspace(static_cast<unsigned char>(bytes[pos]))) {
        ++pos;
      } else if (bytes[pos] == '#') {
        while (pos < bytes.size() && bytes[pos] != '\n') ++pos;
      } else {
        break;
      }
    }
    const size_t start = pos;
    while (pos < bytes.size() && !std::isspace(static_cast<unsigned char>(bytes[pos]))) ++pos;
    if (start == pos) throw ValidationError(path + ": truncated image header");
    return bytes.substr(start, pos - start);
  };
  h.magic = next_token();
  h.width = std::stoi(next_token());
  h.height = std::stoi(next_token());
  h.maxval = std::stoi(next_token());
  if (pos >= bytes.size()) throw ValidationError(path + ": missing raster data");
  ++pos;  // single whitespace after maxval
  h.data_offset = pos;
  if (h.width < 1 || h.height < 1) throw ValidationError(path + ": bad image dimensions");
  if (h.maxval != 255) throw ValidationError(path + ": only 8-bit images are supported");
  return h;
}

unsigned char quantize(double v) {
  const double c = std::min(1.0, std::max(0.0, v));
  return static_cast<unsigned char>(std::lround(c * 255.0));
}

double number_or(const ordered_json& j, const char* key, double fallback) {
  return j.contains(key) ? j.at(key).get<double>() : fallback;
}

}  // namespace

Mesh read_obj(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open " + path);
  Mesh mesh;
  std::string line;
  size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::istringstream ls(line);
    std::string tag;
    if (!(ls >> tag)) continue;
    if (tag == "v") {
      Vec3 v;
      if (!(ls >> v.x() >> v.y() >> v.z()))
        throw ValidationError(path + ":" + std::to_string(line_no) + ": malformed vertex");
      mesh.vertices.push_back(v);
    } else if (tag == "f") {
      std::vector<int> idx;
      std::string tok;
      while (ls >> tok) {
        const size_t slash = tok.find('/');
        const std::string head = slash == std::string::npos ? tok : tok.substr(0, slash);
        int i = 0;
        try {
          i = std::stoi(head);
        } catch (const std::exception&) {
          throw ValidationError(path + ":" + std::to_string(line_no) + ": malformed face index");
        }
        if (i < 1 || size_t(i) > mesh.vertices.size())
          throw ValidationError(path + ":" + std::to_string(line_no) +
                                ": face index out of range");
        idx.push_back(i - 1);
      }
      if (idx.size() < 3)
        throw ValidationError(path + ":" + std::to_string(line_no) + ": face needs 3+ vertices");
      for (size_t k = 1; k + 1 < idx.size(); ++k)
        mesh.faces.push_back({idx[0], idx[k], idx[k + 1]});
    }
  }
  return mesh;
}

void write_obj(const Mesh& mesh, const std::string& path) {
  std::ofstream out = open_out(path);
  char buf[160];
  for (const Vec3& v : mesh.vertices) {
    std::snprintf(buf, sizeof buf, "v %.9g %.9g %.9g\n", v.x(), v.y(), v.z());
    out << buf;
  }
  for (const auto& f : mesh.faces) {
    std::snprintf(buf, sizeof buf, "f %d %d %d\n", f[0] + 1, f[1] + 1, f[2] + 1);
    out << buf;
  }
  finish(out, path);
}

void write_ppm(const Image& color, const std::string& path) {
  if (color.channels != 3) throw ValidationError("ppm writer expects a 3-channel image");
  std::ofstream out = open_out(path, /*binary=*/true);
  out << "P6\n" << color.width << " " << color.height << "\n255\n";
  std::vector<unsigned char> row(size_t(color.width) * 3);
  for (int y = 0; y < color.height; ++y) {
    for (int x = 0; x < color.width; ++x)
      for (int c = 0; c < 3; ++c) row[size_t(x) * 3 + c] = quantize(color.at(x, y, c));
    out.write(reinterpret_cast<const char*>(row.data()), std::streamsize(row.size()));
  }
  finish(out, path);
}

Image read_ppm(const std::string& path) {
  const std::string bytes = read_text(path);
  const PnmHeader h = parse_pnm_header(bytes, path);
  if (h.magic != "P6") throw ValidationError(path + ": expected binary PPM (P6)");
  const size_t need = size_t(h.width) * h.height * 3;
  if (bytes.size() - h.data_offset < need) throw ValidationError(path + ": truncated raster");
  Image img(h.width, h.height, 3);
  for (size_t i = 0; i < need; ++i)
    img.data[i] = double(static_cast<unsigned char>(bytes[h.data_offset + i])) / 255.0;
  return img;
}

void write_pgm(const Image& image, int channel, const std::string& path, double scale) {
  if (channel < 0 || channel >= image.channels)
    throw ValidationError("pgm writer: channel out of range");
  if (!(scale > 0.0)) throw ValidationError("pgm writer: scale must be positive");
  std::ofstream out = open_out(path, /*binary=*/true);
  out << "P5\n" << image.width << " " << image.height << "\n255\n";
  std::vector<unsigned char> row(size_t(image.width));
  for (int y = 0; y < image.height; ++y) {
    for (int x = 0; x < image.width; ++x) row[size_t(x)] = quantize(image.at(x, y, channel) / scale);
    out.write(reinterpret_cast<const char*>(row.data()), std::streamsize(row.size()));
  }
  finish(out, path);
}

Image read_pgm(const std::string& path) {
  const std::string bytes = read_text(path);
  const PnmHeader h = parse_pnm_header(bytes, path);
  if (h.magic != "P5") throw ValidationError(path + ": expected binary PGM (P5)");
  const size_t need = size_t(h.width) * h.height;
  if (bytes.size() - h.data_offset < need) throw ValidationError(path + ": truncated raster");
  Image img(h.width, h.height, 1);
  for (size_t i = 0; i < need; ++i)
    img.data[i] = double(static_cast<unsigned char>(bytes[h.data_offset + i])) / 255.0;
  return img;
}

void write_flow_csv(const Image& flow, const Image& valid, const std::string& path) {
  if (flow.channels != 2) throw ValidationError("flow writer expects a 2-channel image");
  if (valid.width != flow.width || valid.height != flow.height || valid.channels != 1)
    throw ValidationError("flow writer: validity mask shape mismatch");
  std::ofstream out = open_out(path);
  out << "x,y,fx,fy\n";
  char buf[128];
  for (int y = 0; y < flow.height; ++y)
    for (int x = 0; x < flow.width; ++x) {
      if (valid.at(x, y, 0) <= 0.5) continue;
      std::snprintf(buf, sizeof buf, "%d,%d,%.9g,%.9g\n", x, y, flow.at(x, y, 0),
                    flow.at(x, y, 1));
      out << buf;
    }
  finish(out, path);
}

void read_flow_csv(const std::string& path, Image& flow, Image& valid) {
  if (flow.channels != 2 || valid.channels != 1 || flow.width != valid.width ||
      flow.height != valid.height || flow.width < 1)
    throw ValidationError("flow reader: destination images must be pre-sized (2ch flow, 1ch mask)");
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open " + path);
  std::string line;
  if (!std::getline(in, line) || line.rfind("x,y,fx,fy", 0) != 0)
    throw ValidationError(path + ": missing flow CSV header");
  size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    int x = 0, y = 0;
    double fx = 0.0, fy = 0.0;
    if (std::sscanf(line.c_str(), "%d,%d,%lf,%lf", &x, &y, &fx, &fy) != 4)
      throw ValidationError(path + ":" + std::to_string(line_no) + ": malformed flow row");
    if (x < 0 || x >= flow.width || y < 0 || y >= flow.height)
      throw ValidationError(path + ":" + std::to_string(line_no) + ": pixel out of range");
    flow.at(x, y, 0) = fx;
    flow.at(x, y, 1) = fy;
    valid.at(x, y, 0) = 1.0;
  }
}

MatX read_features(const std::string& path) {
  MatX m;
  if (path.size() > 4 && path.substr(path.size() - 4) == ".csv") {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open " + path);
    std::vector<std::vector<double>> rows;
    std::string line;
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      std::vector<double> row;
      std::istringstream ls(line);
      std::string cell;
      while (std::getline(ls, cell, ',')) {
        try {
          row.push_back(std::stod(cell));
        } catch (const std::exception&) {
          throw ValidationError(path + ": malformed CSV number '" + cell + "'");
        }
      }
      if (!rows.empty() && row.size() != rows[0].size())
        throw ValidationError(path + ": ragged CSV rows");
      rows.push_back(std::move(row));
    }
    if (rows.empty()) throw ValidationError(path + ": empty feature file");
    m.resize(Eigen::Index(rows.size()), Eigen::Index(rows[0].size()));
    for (size_t r = 0; r < rows.size(); ++r)
      for (size_t c = 0; c < rows[0].size(); ++c) m(Eigen::Index(r), Eigen::Index(c)) = rows[r][c];
  } else {
    const ordered_json sidecar = parse_json_file(path + ".json");
    try {
      const auto dims = sidecar.at("dims");
      if (!dims.is_array() || dims.size() != 2)
        throw ValidationError(path + ".json: dims must be [rows, cols]");
      const int rows = dims[0].get<int>(), cols = dims[1].get<int>();
      if (rows < 1 || cols < 1) throw ValidationError(path + ".json: dims must be positive");
      const std::string layout =
          sidecar.contains("layout") ? sidecar.at("layout").get<std::string>() : "column-major";
      if (layout != "column-major" && layout != "row-major")
        throw ValidationError(path + ".json: layout must be column-major or row-major");
      const std::vector<float> raw = read_raw_f32(path);
      if (raw.size() != size_t(rows) * size_t(cols))
        throw ValidationError(path + ": raw size does not match dims");
      m.resize(rows, cols);
      for (int c = 0; c < cols; ++c)
        for (int r = 0; r < rows; ++r)
          m(r, c) = layout == "column-major" ? raw[size_t(c) * rows + r] : raw[size_t(r) * cols + c];
    } catch (const nlohmann::json::exception& e) {
      throw ValidationError(path + ".json: " + e.what());
    }
  }
  validate_features(m);
  return m;
}

void write_features(const MatX& features, const std::string& path) {
  validate_features(features);
  if (path.size() > 4 && path.substr(path.size() - 4) == ".csv") {
    std::ofstream out = open_out(path);
    char buf[40];
    for (Eigen::Index r = 0; r < features.rows(); ++r) {
      for (Eigen::Index c = 0; c < features.cols(); ++c) {
        // full precision so text storage is lossless
        std::snprintf(buf, sizeof buf, "%.17g", features(r, c));
        out << (c ? "," : "") << buf;
      }
      out << "\n";
    }
    finish(out, path);
    return;
  }
  std::vector<float> raw(size_t(features.size()));
  for (Eigen::Index c = 0; c < features.cols(); ++c)
    for (Eigen::Index r = 0; r < features.rows(); ++r)
      raw[size_t(c) * size_t(features.rows()) + size_t(r)] = float(features(r, c));
  write_raw_f32(raw, path);
  ordered_json sidecar;
  sidecar["dims"] = ordered_json::array({features.rows(), features.cols()});
  sidecar["layout"] = "column-major";
  std::ofstream out = open_out(path + ".json");
  out << sidecar.dump(2) << "\n";
  finish(out, path + ".json");
}

void write_plan_csv(const MatX& plan, const std::string& path) {
  std::ofstream out = open_out(path);
  out << "row,col,mass\n";
  char buf[96];
  for (Eigen::Index i = 0; i < plan.rows(); ++i)
    for (Eigen::Index j = 0; j < plan.cols(); ++j) {
      std::snprintf(buf, sizeof buf, "%lld,%lld,%.9g\n", static_cast<long long>(i),
                    static_cast<long long>(j), plan(i, j));
      out << buf;
    }
  finish(out, path);
}

std::vector<float> read_raw_f32(const std::string& path) {
  const std::string bytes = read_text(path);
  if (bytes.size() % 4 != 0)
    throw ValidationError(path + ": size is not a multiple of 4 bytes");
  std::vector<float> out(bytes.size() / 4);
  std::memcpy(out.data(), bytes.data(), bytes.size());
  return out;
}

void write_raw_f32(const std::vector<float>& values, const std::string& path) {
  std::ofstream out = open_out(path, /*binary=*/true);
  out.write(reinterpret_cast<const char*>(values.data()), std::streamsize(values.size() * 4));
  finish(out, path);
}

Rig read_rig_json(const std::string& path) {
  const ordered_json j = parse_json_file(path);
  try {
    Rig rig;
    for (const auto& joint : j.at("joints")) {
      Joint out;
      out.center = vec3_from(joint.at("center"), "joint center");
      out.orientation = mat3_from(joint.at("orientation"), "joint orientation");
      out.precision = vec3_from(joint.at("precision"), "joint precision");
      rig.joints.push_back(out);
    }
    rig.validate();
    return rig;
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(path + ": " + e.what());
  }
}

void write_rig_json(const Rig& rig, const std::string& path) {
  ordered_json joints = ordered_json::array();
  for (const Joint& joint : rig.joints) {
    ordered_json j;
    j["center"] = vec3_json(joint.center);
    j["orientation"] = mat3_json(joint.orientation);
    j["precision"] = vec3_json(joint.precision);
    joints.push_back(j);
  }
  ordered_json root;
  root["joints"] = joints;
  std::ofstream out = open_out(path);
  out << root.dump(2) << "\n";
  finish(out, path);
}

PoseTable read_pose_json(const std::string& path) {
  const ordered_json j = parse_json_file(path);
  try {
    PoseTable table;
    for (const auto& frame : j.at("frames")) {
      PoseTable::Frame f;
      f.t = frame.at("t").get<int>();
      for (const auto& joint : frame.at("joints")) {
        if (!joint.is_array() || joint.size() != 7)
          throw ValidationError(path + ": pose joints must be 7-scalar arrays");
        PoseParam p;
        p.t = Vec3(joint[0].get<double>(), joint[1].get<double>(), joint[2].get<double>());
        p.q = Quaternion{joint[3].get<double>(), joint[4].get<double>(), joint[5].get<double>(),
                         joint[6].get<double>()};
        if (p.q.norm() < 1e-12)
          throw ValidationError(path + ": pose quaternion has zero norm");
        f.joints.push_back(p);
      }
      table.frames.push_back(std::move(f));
    }
    if (table.frames.empty()) throw ValidationError(path + ": pose table has no frames");
    return table;
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(path + ": " + e.what());
  }
}

void write_pose_json(const PoseTable& pose, const std::string& path) {
  ordered_json frames = ordered_json::array();
  for (const auto& frame : pose.frames) {
    ordered_json joints = ordered_json::array();
    for (const PoseParam& p : frame.joints)
      joints.push_back(ordered_json::array(
          {p.t.x(), p.t.y(), p.t.z(), p.q.w, p.q.x, p.q.y, p.q.z}));
    ordered_json f;
    f["t"] = frame.t;
    f["joints"] = joints;
    frames.push_back(f);
  }
  ordered_json root;
  root["frames"] = frames;
  std::ofstream out = open_out(path);
  out << root.dump(2) << "\n";
  finish(out, path);
}

Camera read_camera_json(const std::string& path) {
  const ordered_json j = parse_json_file(path);
  try {
    Camera cam;
    const auto& ext = j.at("extrinsic");
    cam.extrinsic.rotation = mat3_from(ext.at("rotation"), "extrinsic rotation");
    cam.extrinsic.translation = vec3_from(ext.at("translation"), "extrinsic translation");
    if (!cam.extrinsic.is_orthonormal(1e-6))
      throw ValidationError(path + ": extrinsic rotation is not orthonormal");
    const auto& intr = j.at("intrinsics");
    if (!intr.is_array() || intr.size() != 4)
      throw ValidationError(path + ": intrinsics must be [fx, fy, cx, cy]");
    cam.fx = intr[0].get<double>();
    cam.fy = intr[1].get<double>();
    cam.cx = intr[2].get<double>();
    cam.cy = intr[3].get<double>();
    cam.validate();
    return cam;
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(path + ": " + e.what());
  }
}

void write_camera_json(const Camera& cam, const std::string& path) {
  ordered_json root;
  ordered_json ext;
  ext["rotation"] = mat3_json(cam.extrinsic.rotation);
  ext["translation"] = vec3_json(cam.extrinsic.translation);
  root["extrinsic"] = ext;
  root["intrinsics"] = ordered_json::array({cam.fx, cam.fy, cam.cx, cam.cy});
  std::ofstream out = open_out(path);
  out << root.dump(2) << "\n";
  finish(out, path);
}

std::shared_ptr<SdfScene> read_scene_json(const std::string& path) {
  const ordered_json j = parse_json_file(path);
  try {
    if (j.contains("primitives")) {
      std::vector<Primitive> prims;
      for (const auto& p : j.at("primitives")) {
        Primitive prim;
        const std::string type = p.at("type").get<std::string>();
        if (type == "sphere") {
          prim.kind = Primitive::Kind::Sphere;
          prim.center = vec3_from(p.at("center"), "sphere center");
          prim.radius = p.at("radius").get<double>();
        } else if (type == "capsule") {
          prim.kind = Primitive::Kind::Capsule;
          prim.a = vec3_from(p.at("a"), "capsule endpoint a");
          prim.b = vec3_from(p.at("b"), "capsule endpoint b");
          prim.radius = p.at("radius").get<double>();
        } else if (type == "box") {
          prim.kind = Primitive::Kind::Box;
          prim.center = vec3_from(p.at("center"), "box center");
          prim.half_extents = vec3_from(p.at("half_extents"), "box half extents");
        } else {
          throw ValidationError(path + ": unknown primitive type '" + type + "'");
        }
        if (p.contains("color")) prim.rgb = vec3_from(p.at("color"), "primitive color");
        prims.push_back(prim);
      }
      return std::make_shared<PrimitiveScene>(std::move(prims));
    }
    if (j.contains("grid")) {
      const auto& g = j.at("grid");
      const auto& dims_j = g.at("dims");
      if (!dims_j.is_array() || dims_j.size() != 3)
        throw ValidationError(path + ": grid dims must be [nx, ny, nz]");
      const std::array<int, 3> dims{dims_j[0].get<int>(), dims_j[1].get<int>(),
                                    dims_j[2].get<int>()};
      const auto& b = g.at("bounds");
      if (!b.is_array() || b.size() != 6)
        throw ValidationError(path + ": grid bounds must be [minx,miny,minz,maxx,maxy,maxz]");
      Box3 box{Vec3(b[0].get<double>(), b[1].get<double>(), b[2].get<double>()),
               Vec3(b[3].get<double>(), b[4].get<double>(), b[5].get<double>())};
      const std::vector<float> sdf_raw = read_raw_f32(resolve(path, g.at("sdf").get<std::string>()));
      const std::vector<float> color_raw =
          read_raw_f32(resolve(path, g.at("color").get<std::string>()));
      return std::make_shared<GridScene>(
          dims, box, std::vector<double>(sdf_raw.begin(), sdf_raw.end()),
          std::vector<double>(color_raw.begin(), color_raw.end()));
    }
    throw ValidationError(path + ": scene needs either 'primitives' or 'grid'");
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(path + ": " + e.what());
  }
}

CanonicalGrid read_grid_json(const std::string& path) {
  const ordered_json j = parse_json_file(path);
  try {
    CanonicalGrid grid;
    if (j.contains("dims")) {
      const auto& d = j.at("dims");
      if (!d.is_array() || d.size() != 3)
        throw ValidationError(path + ": grid dims must be [nx, ny, nz]");
      grid.dims = {d[0].get<int>(), d[1].get<int>(), d[2].get<int>()};
    }
    const auto& b = j.at("bounds");
    if (!b.is_array() || b.size() != 6)
      throw ValidationError(path + ": grid bounds must be [minx,miny,minz,maxx,maxy,maxz]");
    grid.box = Box3{Vec3(b[0].get<double>(), b[1].get<double>(), b[2].get<double>()),
                    Vec3(b[3].get<double>(), b[4].get<double>(), b[5].get<double>())};
    grid.validate();
    return grid;
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(path + ": " + e.what());
  }
}

FitProblem read_fit_problem(const std::string& path) {
  const ordered_json j = parse_json_file(path);
  try {
    FitProblem problem;
    problem.scene = read_scene_json(resolve(path, j.at("scene").get<std::string>()));
    problem.rig = read_rig_json(resolve(path, j.at("rig").get<std::string>()));
    problem.init = read_pose_json(resolve(path, j.at("init_pose").get<std::string>()));

    if (j.contains("render")) {
      const auto& r = j.at("render");
      problem.render.samples = int(number_or(r, "samples", problem.render.samples));
      problem.render.near = number_or(r, "near", problem.render.near);
      problem.render.far = number_or(r, "far", problem.render.far);
      problem.render.beta = number_or(r, "beta", problem.render.beta);
      problem.render.gamma = number_or(r, "gamma", problem.render.gamma);
      problem.render.lambda = number_or(r, "lambda", problem.render.lambda);
      problem.render.amp = number_or(r, "amp", problem.render.amp);
      if (r.contains("texture_filtering"))
        problem.render.texture_filtering = r.at("texture_filtering").get<bool>();
      if (r.contains("jitter")) problem.render.jitter = r.at("jitter").get<bool>();
      problem.render.seed = uint64_t(number_or(r, "seed", double(problem.render.seed)));
    }
    if (j.contains("weights")) {
      const auto& w = j.at("weights");
      problem.weights.rgb = number_or(w, "rgb", problem.weights.rgb);
      problem.weights.sil = number_or(w, "sil", problem.weights.sil);
      problem.weights.flow = number_or(w, "flow", problem.weights.flow);
      problem.weights.match = number_or(w, "match", problem.weights.match);
      problem.weights.proj = number_or(w, "proj", problem.weights.proj);
      problem.weights.cycle = number_or(w, "cycle", problem.weights.cycle);
      problem.weights.eikonal = number_or(w, "eikonal", problem.weights.eikonal);
    }
    if (j.contains("optimizer")) {
      const auto& o = j.at("optimizer");
      problem.opt.iterations = int(number_or(o, "iterations", problem.opt.iterations));
      problem.opt.step = number_or(o, "step", problem.opt.step);
      problem.opt.fd_step = number_or(o, "fd_step", problem.opt.fd_step);
      problem.opt.grad_tol = number_or(o, "grad_tol", problem.opt.grad_tol);
      problem.opt.max_halvings = int(number_or(o, "max_halvings", problem.opt.max_halvings));
      problem.opt.seed = uint64_t(number_or(o, "seed", double(problem.opt.seed)));
      if (o.contains("normalize")) problem.opt.normalize = o.at("normalize").get<bool>();
    }

    for (const auto& frame_j : j.at("frames")) {
      FitFrame frame;
      frame.t = frame_j.at("t").get<int>();
      frame.cam = read_camera_json(resolve(path, frame_j.at("camera").get<std::string>()));
      frame.color = read_ppm(resolve(path, frame_j.at("color").get<std::string>()));
      frame.silhouette = read_pgm(resolve(path, frame_j.at("silhouette").get<std::string>()));
      if (frame_j.contains("flow")) {
        frame.flow = Image(frame.color.width, frame.color.height, 2);
        frame.flow_valid = Image(frame.color.width, frame.color.height, 1);
        read_flow_csv(resolve(path, frame_j.at("flow").get<std::string>()), frame.flow,
                      frame.flow_valid);
        frame.flow_to = frame_j.at("flow_to").get<int>();
      }
      problem.frames.push_back(std::move(frame));
    }
    problem.validate();
    return problem;
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(path + ": " + e.what());
  }
}

void write_metrics_json(const std::string& path, double chamfer_sum, double chamfer_mean,
                        double f_score_2pct, int n_samples, uint64_t seed) {
  ordered_json root;
  root["chamfer_sum"] = chamfer_sum;
  root["chamfer_mean"] = chamfer_mean;
  root["f_score_2pct"] = f_score_2pct;
  root["n_samples"] = n_samples;
  root["seed"] = seed;
  std::ofstream out = open_out(path);
  out << root.dump(2) << "\n";
  finish(out, path);
}

void write_loss_trace_csv(const std::vector<FitTraceRow>& trace, const std::string& path) {
  std::ofstream out = open_out(path);
  out << "frame,iteration,loss,grad_norm,step\n";
  char buf[160];
  for (const FitTraceRow& row : trace) {
    std::snprintf(buf, sizeof buf, "%d,%d,%.12g,%.12g,%.12g\n", row.frame_t, row.iteration,
                  row.loss, row.grad_norm, row.step);
    out << buf;
  }
  finish(out, path);
}

std::string dq_to_json_string(const DualQuaternion& dq) {
  ordered_json root;
  root["real"] = ordered_json::array({dq.real.w, dq.real.x, dq.real.y, dq.real.z});
  root["dual"] = ordered_json::array({dq.dual.w, dq.dual.x, dq.dual.y, dq.dual.z});
  return root.dump();
}

DualQuaternion dq_from_json_string(const std::string& text) {
  try {
    const ordered_json j = ordered_json::parse(text);
    const auto& r = j.at("real");
    const auto& d = j.at("dual");
    if (!r.is_array() || r.size() != 4 || !d.is_array() || d.size() != 4)
      throw ValidationError("dual quaternion JSON needs 4-element real and dual arrays");
    return {{r[0].get<double>(), r[1].get<double>(), r[2].get<double>(), r[3].get<double>()},
            {d[0].get<double>(), d[1].get<double>(), d[2].get<double>(), d[3].get<double>()}};
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("dual quaternion JSON: ") + e.what());
  }
}

}  // namespace deformkit
