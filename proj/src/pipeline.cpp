#include "mhi/pipeline.hpp"

#include <cmath>

namespace mhi {

RenderedView render_view(const Mhi& mhi, const RenderRequest& req, const ViewOptions& options) {
  RenderedView view;
  view.multi_normal = render_multi_normal_images(mhi, req);
  const NormalStack costs =
      angle_costs(mhi.config().normals, req.tgt_intrinsics, req.rel_pose.rotation);
  if (options.scheme == BlendScheme::hard && options.normalization == BlendNormalization::coverage)
    view.weights = coverage_hard_weights(costs, view.multi_normal);
  else
    view.weights = make_weights(options.scheme, costs, options.soft_sharpness);
  BlendResult blended = blend(view.multi_normal, view.weights, options.normalization);
  view.image = std::move(blended.image);
  view.holes = std::move(blended.holes);
  return view;
}

RenderRequest view_request_from_json(const Json& j, const Intrinsics& ref_cam) {
  check_format_version(j, 1, "pose");
  RenderRequest req{ref_cam, pose_from_json(j, "pose")};
  if (j.contains("intrinsics")) req.tgt_intrinsics = intrinsics_from_json(j["intrinsics"], "pose.intrinsics");
  return req;
}

void OrbitSpec::validate() const {
  if (!(radius > 0.0) || !std::isfinite(radius)) throw InvariantViolation("orbit radius must be positive");
  if (step_deg == 0.0 || !std::isfinite(step_deg)) throw InvariantViolation("orbit step must be nonzero");
  if (count < 1) throw InvariantViolation("orbit count must be at least 1");
}

OrbitSpec orbit_spec_from_json(const Json& j) {
  check_format_version(j, 1, "orbit");
  OrbitSpec s;
  if (j.contains("radius")) s.radius = require_number(j, "radius", "orbit");
  if (j.contains("step_deg")) s.step_deg = require_number(j, "step_deg", "orbit");
  if (j.contains("count")) s.count = require_int(j, "count", "orbit");
  if (j.contains("center")) s.center = vec3_from_json(j["center"], "orbit.center");
  if (j.contains("scheme")) {
    if (!j["scheme"].is_string()) throw FormatError("field orbit.scheme must be a string");
    s.scheme = parse_blend_scheme(j["scheme"].get<std::string>());
  }
  try {
    s.validate();
  } catch (const InvariantViolation& e) {
    throw FormatError(std::string("orbit: ") + e.what());
  }
  return s;
}

std::vector<Pose> orbit_poses(const OrbitSpec& spec) {
  spec.validate();
  const Vec3 c = spec.look_at_center();
  std::vector<Pose> poses;
  poses.reserve(spec.count);
  for (int k = 0; k < spec.count; ++k) {
    const double theta = (k - 0.5 * (spec.count - 1)) * spec.step_deg;
    const Mat3 r = rotation_about_axis(Vec3::UnitY(), theta);
    poses.push_back(Pose{r, c + r * Vec3(0.0, 0.0, -spec.radius)});
  }
  return poses;
}

}  // namespace mhi
