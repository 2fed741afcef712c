#pragma once

#include <map>
#include <memory>
#include <string>

#include "mhi/json_io.hpp"
#include "mhi/mhi.hpp"
#include "mhi/pipeline.hpp"

namespace mhi {

/// Pose on the wire: XYZ intrinsic Euler angles in degrees plus translation
/// in meters, mapping target-camera points into the reference frame.
struct WirePose {
  double rx = 0, ry = 0, rz = 0;
  double tx = 0, ty = 0, tz = 0;

  Pose to_pose() const;
};

/// Renders one view to PNG bytes. The CLI `render` command and the service
/// both go through here, so their outputs are byte-identical.
std::vector<std::uint8_t> render_view_png(const Mhi& mhi, const RenderRequest& req,
                                          const ViewOptions& options);

/// Normalized blend weight map of one normal (0-based) as an 8-bit gray PNG.
std::vector<std::uint8_t> weight_map_png(const RenderedView& view, int normal);

struct HttpResponse {
  int status = 200;
  std::string content_type;
  std::string body;
};

using QueryParams = std::map<std::string, std::string, std::less<>>;

/// Stateless request handler over one immutable Mhi. Safe to call from any
/// number of threads.
class RenderService {
 public:
  explicit RenderService(Mhi mhi, double soft_sharpness = 3.0);

  HttpResponse handle(std::string_view path, const QueryParams& query) const;
  Json meta() const;
  const Mhi& mhi() const { return mhi_; }

 private:
  HttpResponse render(const QueryParams& query, bool weights) const;

  Mhi mhi_;
  double soft_sharpness_;
};

/// httplib front end for a RenderService.
class HttpServer {
 public:
  explicit HttpServer(const RenderService& service);
  ~HttpServer();
  HttpServer(const HttpServer&) = delete;
  HttpServer& operator=(const HttpServer&) = delete;

  /// Binds to `port` (0 picks a free one) and returns the bound port, or -1.
  int bind(const std::string& host, int port);
  /// Serves until stop(); call after bind().
  bool listen();
  void stop();
  void wait_until_ready() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace mhi
