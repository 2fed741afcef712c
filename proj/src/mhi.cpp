#include "mhi/mhi.hpp"

#include <cmath>
#include <cstdio>
#include <sstream>

#include "mhi/json_io.hpp"

namespace mhi {

namespace fs = std::filesystem;

const std::vector<Vec3>& default_normals() {
  static const std::vector<Vec3> normals = [] {
    const double s2 = std::sqrt(2.0) / 2.0;
    const double s3 = std::sqrt(3.0) / 2.0;
    return std::vector<Vec3>{
        Vec3(s2, 0.0, s2), Vec3(0.0, -s3, 0.5), Vec3(0.0, 0.0, 1.0),
        Vec3(0.0, s3, 0.5), Vec3(-s2, 0.0, s2),
    };
  }();
  return normals;
}

std::vector<Vec3> normals_for_count(int n) {
  const auto& all = default_normals();
  switch (n) {
    case 1: return {all[2]};
    case 2: return {all[0], all[4]};
    case 3: return {all[0], all[2], all[4]};
    case 4: return {all[0], all[1], all[3], all[4]};
    case 5: return all;
    default: throw InvariantViolation("normal count must be between 1 and 5");
  }
}

MhiConfig default_config(const Intrinsics& ref, double near_depth, double far_depth,
                         int normal_count, int distances_per_normal) {
  MhiConfig c;
  c.normals = normals_for_count(normal_count);
  c.near_depth = near_depth;
  c.far_depth = far_depth;
  c.distances_per_normal = distances_per_normal;
  c.width = ref.width;
  c.height = ref.height;
  c.ref_intrinsics = ref;
  c.validate();
  return c;
}

MhiConfig default_config(int width, int height, double near_depth, double far_depth,
                         int normal_count, int distances_per_normal) {
  return default_config(Intrinsics::from_hfov(width, height, 90.0), near_depth, far_depth,
                        normal_count, distances_per_normal);
}

std::vector<double> MhiConfig::disparities() const {
  const int d = distances_per_normal;
  std::vector<double> out(d);
  const double near_disp = 1.0 / near_depth;
  const double far_disp = 1.0 / far_depth;
  const double step = (near_disp - far_disp) / (d - 1);
  for (int j = 0; j < d; ++j) out[j] = near_disp - j * step;
  out.back() = far_disp;
  return out;
}

std::vector<double> MhiConfig::depths() const {
  auto disp = disparities();
  std::vector<double> out(disp.size());
  for (std::size_t j = 0; j < disp.size(); ++j) out[j] = 1.0 / disp[j];
  out.front() = near_depth;
  out.back() = far_depth;
  return out;
}

Plane MhiConfig::plane(int normal_index, int distance_index) const {
  return Plane::through_axis_depth(normals.at(normal_index), depths().at(distance_index));
}

void MhiConfig::validate() const {
  if (normals.empty()) throw InvariantViolation("MHI needs at least one normal");
  if (distances_per_normal < 2) throw InvariantViolation("MHI needs at least two distances");
  if (!(near_depth > 0.0) || !(far_depth > near_depth))
    throw InvariantViolation("depth range must satisfy 0 < near < far");
  for (std::size_t a = 0; a < normals.size(); ++a) {
    if (!normals[a].allFinite() || std::abs(normals[a].norm() - 1.0) > 1e-12) {
      std::ostringstream os;
      os << "normal " << a + 1 << " is not unit length (norm " << normals[a].norm() << ")";
      throw InvariantViolation(os.str());
    }
    if (std::abs(normals[a].z()) < 1e-12)
      throw InvariantViolation("normal " + std::to_string(a + 1) + " never crosses the optical axis");
    for (std::size_t b = 0; b < a; ++b)
      if (normals[a] == normals[b])
        throw InvariantViolation("normals " + std::to_string(b + 1) + " and " +
                                 std::to_string(a + 1) + " are equal");
  }
  ref_intrinsics.validate();
  if (width != ref_intrinsics.width || height != ref_intrinsics.height)
    throw InvariantViolation("MHI size does not match the reference intrinsics");
}

Mhi::Mhi(MhiConfig config) : config_(std::move(config)) {
  config_.validate();
  const auto depths = config_.depths();
  layers_.reserve(config_.layer_count());
  for (int i = 0; i < config_.normal_count(); ++i) {
    for (int j = 0; j < config_.distances_per_normal; ++j) {
      layers_.push_back(MhiLayer{RgbaImage(config_.width, config_.height),
                                 Plane::through_axis_depth(config_.normals[i], depths[j]), i, j});
    }
  }
}

Mhi::Mhi(MhiConfig config, std::vector<MhiLayer> layers)
    : config_(std::move(config)), layers_(std::move(layers)) {
  validate();
}

void Mhi::validate() const {
  config_.validate();
  if (static_cast<int>(layers_.size()) != config_.layer_count())
    throw InvariantViolation("MHI has " + std::to_string(layers_.size()) + " layers, expected " +
                             std::to_string(config_.layer_count()));
  const auto depths = config_.depths();
  for (int i = 0; i < config_.normal_count(); ++i) {
    for (int j = 0; j < config_.distances_per_normal; ++j) {
      const MhiLayer& l = layer(i, j);
      const std::string name =
          "layer (" + std::to_string(i + 1) + "," + std::to_string(j + 1) + ")";
      if (l.normal_index != i || l.distance_index != j)
        throw InvariantViolation(name + " carries wrong indices");
      if (!l.rgba.same_size(config_.width, config_.height))
        throw InvariantViolation(name + " has wrong dimensions");
      const Plane expected = Plane::through_axis_depth(config_.normals[i], depths[j]);
      if ((l.plane.normal() - expected.normal()).cwiseAbs().maxCoeff() > 1e-12 ||
          std::abs(l.plane.offset() - expected.offset()) > 1e-9 * std::abs(expected.offset()))
        throw InvariantViolation(name + " plane does not match the sampling schedule");
      for (float v : l.rgba.data())
        if (!(v >= 0.0f && v <= 1.0f))
          throw InvariantViolation(name + " has color or alpha outside [0,1]");
    }
  }
}

namespace {

constexpr int kFormatVersion = 1;

std::string layer_file_name(int i, int j) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "layer_%02d_%03d.png", i + 1, j + 1);
  return buf;
}

}  // namespace

void save_mhi(const Mhi& mhi, const fs::path& dir, int bit_depth) {
  if (bit_depth != 8 && bit_depth != 16) throw FormatError("bit depth must be 8 or 16");
  fs::create_directories(dir);
  const MhiConfig& c = mhi.config();
  Json normals = Json::array();
  for (const auto& n : c.normals) normals.push_back(to_json(n));
  Json layers = Json::array();
  for (const MhiLayer& l : mhi.layers()) {
    const std::string file = layer_file_name(l.normal_index, l.distance_index);
    write_png(dir / file, l.rgba, bit_depth);
    layers.push_back({{"normal_index", l.normal_index + 1},
                      {"distance_index", l.distance_index + 1},
                      {"offset", l.plane.offset()},
                      {"file", file}});
  }
  const Json manifest = {
      {"format_version", kFormatVersion},
      {"width", c.width},
      {"height", c.height},
      {"ref_intrinsics", to_json(c.ref_intrinsics)},
      {"near_depth", c.near_depth},
      {"far_depth", c.far_depth},
      {"distances_per_normal", c.distances_per_normal},
      {"normals", normals},
      {"depths", c.depths()},
      {"quantization", {{"bit_depth", bit_depth}, {"color", "linear"}, {"alpha", "straight"}}},
      {"layers", layers},
  };
  write_json_file(dir / "mhi.json", manifest);
}

Mhi load_mhi(const fs::path& dir) {
  const fs::path manifest_path = dir / "mhi.json";
  if (!fs::exists(manifest_path)) throw FormatError("missing manifest " + manifest_path.string());
  const Json m = read_json_file(manifest_path);
  check_format_version(m, kFormatVersion, "mhi.json");

  MhiConfig c;
  c.width = require_int(m, "width", "mhi.json");
  c.height = require_int(m, "height", "mhi.json");
  c.ref_intrinsics = intrinsics_from_json(require(m, "ref_intrinsics", "mhi.json"),
                                          "mhi.json.ref_intrinsics");
  c.near_depth = require_number(m, "near_depth", "mhi.json");
  c.far_depth = require_number(m, "far_depth", "mhi.json");
  c.distances_per_normal = require_int(m, "distances_per_normal", "mhi.json");
  const Json& normals = require(m, "normals", "mhi.json");
  if (!normals.is_array()) throw FormatError("mhi.json.normals must be an array");
  for (const Json& n : normals) c.normals.push_back(vec3_from_json(n, "mhi.json.normals[]"));
  c.validate();  // InvariantViolation on non-unit normals etc.

  const int bit_depth = require_int(require(m, "quantization", "mhi.json"), "bit_depth",
                                    "mhi.json.quantization");
  if (bit_depth != 8 && bit_depth != 16) throw FormatError("unsupported bit depth in mhi.json");

  const auto depths = c.depths();
  std::vector<MhiLayer> layers;
  layers.reserve(c.layer_count());
  for (int i = 0; i < c.normal_count(); ++i) {
    for (int j = 0; j < c.distances_per_normal; ++j) {
      const std::string tag = "(" + std::to_string(i + 1) + "," + std::to_string(j + 1) + ")";
      const fs::path file = dir / layer_file_name(i, j);
      if (!fs::exists(file)) throw FormatError("missing layer file for " + tag + ": " + file.string());
      PngImage png;
      try {
        png = read_png(file);
      } catch (const FormatError& e) {
        throw FormatError("layer " + tag + ": " + e.what());
      }
      if (png.channels != 4 || png.width != c.width || png.height != c.height)
        throw FormatError("layer " + tag + " is not a " + std::to_string(c.width) + "x" +
                          std::to_string(c.height) + " RGBA image");
      MhiLayer layer{RgbaImage(c.width, c.height),
                     Plane::through_axis_depth(c.normals[i], depths[j]), i, j};
      std::copy(png.data.begin(), png.data.end(), layer.rgba.data().begin());
      layers.push_back(std::move(layer));
    }
  }
  return Mhi(std::move(c), std::move(layers));
}

}  // namespace mhi
