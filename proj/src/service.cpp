#include "mhi/service.hpp"

#include <charconv>
#include <cmath>

#include <httplib.h>

namespace mhi {

Pose WirePose::to_pose() const {
  return Pose{rotation_from_euler_xyz_deg(rx, ry, rz), Vec3(tx, ty, tz)};
}

std::vector<std::uint8_t> render_view_png(const Mhi& mhi, const RenderRequest& req,
                                          const ViewOptions& options) {
  return encode_png(render_view(mhi, req, options).image);
}

std::vector<std::uint8_t> weight_map_png(const RenderedView& view, int normal) {
  const auto maps = normalized_weight_maps(view.weights);
  if (normal < 0 || normal >= static_cast<int>(maps.size()))
    throw InvariantViolation("normal index out of range");
  return encode_png(maps[normal]);
}

namespace {

HttpResponse json_response(int status, const Json& body) {
  return {status, "application/json", body.dump()};
}

HttpResponse error_response(int status, const std::string& message) {
  return json_response(status, Json{{"error", message}});
}

HttpResponse png_response(const std::vector<std::uint8_t>& bytes) {
  return {200, "image/png", std::string(bytes.begin(), bytes.end())};
}

// Reads a finite decimal parameter; absent means `fallback`.
double number_param(const QueryParams& q, const char* key, double fallback) {
  const auto it = q.find(key);
  if (it == q.end()) return fallback;
  const std::string& s = it->second;
  double v = 0.0;
  const auto [end, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || end != s.data() + s.size() || !std::isfinite(v))
    throw FormatError(std::string("parameter ") + key + " must be a finite number");
  return v;
}

WirePose parse_pose(const QueryParams& q) {
  WirePose p;
  p.rx = number_param(q, "rx", 0.0);
  p.ry = number_param(q, "ry", 0.0);
  p.rz = number_param(q, "rz", 0.0);
  p.tx = number_param(q, "tx", 0.0);
  p.ty = number_param(q, "ty", 0.0);
  p.tz = number_param(q, "tz", 0.0);
  for (const auto& [name, v] : {std::pair{"rx", p.rx}, {"ry", p.ry}, {"rz", p.rz}})
    if (v < -180.0 || v > 180.0)
      throw FormatError(std::string("parameter ") + name + " must lie in [-180, 180]");
  return p;
}

}  // namespace

RenderService::RenderService(Mhi mhi, double soft_sharpness)
    : mhi_(std::move(mhi)), soft_sharpness_(soft_sharpness) {
  mhi_.validate();
}

Json RenderService::meta() const {
  const MhiConfig& c = mhi_.config();
  Json normals = Json::array();
  for (const Vec3& n : c.normals) normals.push_back(to_json(n));
  return {{"format_version", 1},
          {"width", c.width},
          {"height", c.height},
          {"intrinsics", to_json(c.ref_intrinsics)},
          {"near_depth", c.near_depth},
          {"far_depth", c.far_depth},
          {"distances_per_normal", c.distances_per_normal},
          {"normals", normals},
          {"depths", c.depths()},
          {"schemes", {"hard", "soft", "average"}},
          {"default_scheme", "soft"},
          {"pose_format",
           {{"rotation", "rx, ry, rz: intrinsic XYZ Euler angles in degrees, each in [-180, 180]; "
                         "R = Rx(rx) Ry(ry) Rz(rz)"},
            {"translation", "tx, ty, tz in meters"},
            {"convention", "X_reference = R X_target + t; camera looks along +z, x right, y down"},
            {"defaults", "omitted parameters are 0; the zero pose is the reference view"}}},
          {"endpoints",
           {{"/meta", "this document"},
            {"/render", "rx ry rz tx ty tz [scheme] -> image/png"},
            {"/weights", "rx ry rz tx ty tz [scheme] normal=1..N -> grayscale image/png"}}}};
}

HttpResponse RenderService::render(const QueryParams& query, bool weights) const {
  WirePose pose;
  ViewOptions options;
  options.soft_sharpness = soft_sharpness_;
  int normal = 0;
  try {
    pose = parse_pose(query);
    if (const auto it = query.find("scheme"); it != query.end())
      options.scheme = parse_blend_scheme(it->second);
    if (weights) {
      const auto it = query.find("normal");
      if (it == query.end()) throw FormatError("parameter normal is required");
      const int n = mhi_.config().normal_count();
      const std::string& s = it->second;
      const auto [end, ec] = std::from_chars(s.data(), s.data() + s.size(), normal);
      if (ec != std::errc() || end != s.data() + s.size() || normal < 1 || normal > n)
        throw FormatError("parameter normal must be an integer in [1, " + std::to_string(n) + "]");
    }
  } catch (const Error& e) {
    return error_response(400, e.what());
  }
  try {
    const RenderRequest req{mhi_.config().ref_intrinsics, pose.to_pose()};
    if (!weights) return png_response(render_view_png(mhi_, req, options));
    return png_response(weight_map_png(render_view(mhi_, req, options), normal - 1));
  } catch (const Error& e) {
    return error_response(400, e.what());
  } catch (const std::exception& e) {
    return error_response(500, e.what());
  }
}

HttpResponse RenderService::handle(std::string_view path, const QueryParams& query) const {
  if (path == "/meta") return json_response(200, meta());
  if (path == "/render") return render(query, false);
  if (path == "/weights") return render(query, true);
  return error_response(404, "unknown path " + std::string(path));
}

struct HttpServer::Impl {
  explicit Impl(const RenderService& s) : service(s) {}
  const RenderService& service;
  httplib::Server server;
};

HttpServer::HttpServer(const RenderService& service)
    : impl_(std::make_unique<Impl>(service)) {
  auto handler = [this](const httplib::Request& req, httplib::Response& res) {
    QueryParams query;
    for (const auto& [k, v] : req.params) query.emplace(k, v);  // first value wins
    const HttpResponse r = impl_->service.handle(req.path, query);
    res.status = r.status;
    res.set_content(r.body, r.content_type);
    if (r.status == 200) res.set_header("Cache-Control", "public, max-age=31536000, immutable");
  };
  impl_->server.Get(".*", handler);
}

HttpServer::~HttpServer() { stop(); }

int HttpServer::bind(const std::string& host, int port) {
  if (port == 0) return impl_->server.bind_to_any_port(host);
  return impl_->server.bind_to_port(host, port) ? port : -1;
}

bool HttpServer::listen() { return impl_->server.listen_after_bind(); }

void HttpServer::stop() { impl_->server.stop(); }

void HttpServer::wait_until_ready() const { impl_->server.wait_until_ready(); }

}  // namespace mhi
