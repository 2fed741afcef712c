#include "mhi/json_io.hpp"

#include <fstream>
#include <string>

#include "mhi/errors.hpp"

namespace mhi {

namespace {

std::string field(std::string_view where, std::string_view key) {
  std::string s(where);
  if (!s.empty()) s += '.';
  s += key;
  return s;
}

}  // namespace

const Json& require(const Json& j, std::string_view key, std::string_view where) {
  if (!j.is_object()) throw FormatError(std::string(where) + ": expected an object");
  const auto it = j.find(std::string(key));
  if (it == j.end()) throw FormatError("missing field " + field(where, key));
  return *it;
}

double require_number(const Json& j, std::string_view key, std::string_view where) {
  const Json& v = require(j, key, where);
  if (!v.is_number()) throw FormatError("field " + field(where, key) + " must be a number");
  return v.get<double>();
}

int require_int(const Json& j, std::string_view key, std::string_view where) {
  const Json& v = require(j, key, where);
  if (!v.is_number_integer())
    throw FormatError("field " + field(where, key) + " must be an integer");
  return v.get<int>();
}

void check_format_version(const Json& j, int expected, std::string_view where) {
  const int v = require_int(j, "format_version", where);
  if (v != expected)
    throw FormatError(field(where, "format_version") + " is " + std::to_string(v) +
                      ", expected " + std::to_string(expected));
}

Json to_json(const Intrinsics& k) {
  return {{"fx", k.fx}, {"fy", k.fy}, {"cx", k.cx}, {"cy", k.cy},
          {"width", k.width}, {"height", k.height}};
}

Intrinsics intrinsics_from_json(const Json& j, std::string_view where) {
  Intrinsics k;
  k.fx = require_number(j, "fx", where);
  k.fy = require_number(j, "fy", where);
  k.cx = require_number(j, "cx", where);
  k.cy = require_number(j, "cy", where);
  k.width = require_int(j, "width", where);
  k.height = require_int(j, "height", where);
  try {
    k.validate();
  } catch (const Error& e) {
    throw FormatError(std::string(where) + ": " + e.what());
  }
  return k;
}

Json to_json(const Vec3& v) { return Json::array({v.x(), v.y(), v.z()}); }

Vec3 vec3_from_json(const Json& j, std::string_view where) {
  if (!j.is_array() || j.size() != 3)
    throw FormatError(std::string(where) + " must be an array of 3 numbers");
  Vec3 v;
  for (int i = 0; i < 3; ++i) {
    if (!j[i].is_number()) throw FormatError(std::string(where) + " must contain numbers");
    v[i] = j[i].get<double>();
  }
  return v;
}

Json to_json(const Pose& p) {
  Json rows = Json::array();
  for (int r = 0; r < 3; ++r)
    rows.push_back({p.rotation(r, 0), p.rotation(r, 1), p.rotation(r, 2)});
  return {{"rotation", rows}, {"translation", to_json(p.translation)}};
}

Pose pose_from_json(const Json& j, std::string_view where) {
  Pose p;
  if (j.contains("euler_deg")) {
    const Vec3 e = vec3_from_json(j["euler_deg"], field(where, "euler_deg"));
    p.rotation = rotation_from_euler_xyz_deg(e.x(), e.y(), e.z());
  } else {
    const Json& rows = require(j, "rotation", where);
    if (!rows.is_array() || rows.size() != 3)
      throw FormatError(field(where, "rotation") + " must be a 3x3 array");
    for (int r = 0; r < 3; ++r)
      p.rotation.row(r) = vec3_from_json(rows[r], field(where, "rotation")).transpose();
  }
  p.translation = vec3_from_json(require(j, "translation", where), field(where, "translation"));
  try {
    p.validate();
  } catch (const Error& e) {
    throw FormatError(std::string(where) + ": " + e.what());
  }
  return p;
}

Json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open " + path.string());
  try {
    return Json::parse(in);
  } catch (const Json::parse_error& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

void write_json_file(const std::filesystem::path& path, const Json& j) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw FormatError("cannot open " + path.string() + " for writing");
  out << j.dump(2) << '\n';
}

}  // namespace mhi
