#pragma once

#include <filesystem>
#include <string_view>

#include <json.hpp>

#include "mhi/geometry.hpp"

namespace mhi {

using Json = nlohmann::json;

Json to_json(const Intrinsics& k);
Intrinsics intrinsics_from_json(const Json& j, std::string_view where);

Json to_json(const Vec3& v);
Vec3 vec3_from_json(const Json& j, std::string_view where);

/// {"rotation": [[...],[...],[...]], "translation": [x, y, z]}, or the
/// Euler form {"euler_deg": [rx, ry, rz], "translation": [...]}.
Json to_json(const Pose& p);
Pose pose_from_json(const Json& j, std::string_view where);

Json read_json_file(const std::filesystem::path& path);
void write_json_file(const std::filesystem::path& path, const Json& j);

/// Fetches a required field or throws FormatError naming `where.key`.
const Json& require(const Json& j, std::string_view key, std::string_view where);
double require_number(const Json& j, std::string_view key, std::string_view where);
int require_int(const Json& j, std::string_view key, std::string_view where);

/// Throws FormatError unless j["format_version"] == expected.
void check_format_version(const Json& j, int expected, std::string_view where);

}  // namespace mhi
