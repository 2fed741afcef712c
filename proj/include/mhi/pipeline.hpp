#pragma once

#include <optional>
#include <vector>

#include "mhi/blending.hpp"
#include "mhi/json_io.hpp"
#include "mhi/mhi.hpp"
#include "mhi/renderer.hpp"

namespace mhi {

struct ViewOptions {
  BlendScheme scheme = BlendScheme::soft;
  double soft_sharpness = 3.0;
  BlendNormalization normalization = BlendNormalization::coverage;
};

struct RenderedView {
  RgbImage image;
  Mask holes;
  BlendWeights weights;
  std::vector<MultiNormalImage> multi_normal;
};

/// Full novel-view render: warp and composite per normal, score each normal
/// by its angle cost, blend.
RenderedView render_view(const Mhi& mhi, const RenderRequest& req, const ViewOptions& options = {});

/// pose.json: {"format_version": 1, "euler_deg" | "rotation", "translation",
/// optional "intrinsics"}. Intrinsics default to the reference camera.
RenderRequest view_request_from_json(const Json& j, const Intrinsics& ref_cam);

/// Circular camera path around a look-at center. Frame k sits at angle
/// θ_k = (k − (count−1)/2)·step about the y axis; the middle frame of an odd
/// count is the reference view when the center is (0, 0, radius).
struct OrbitSpec {
  double radius = 2.0;
  double step_deg = 2.0;
  int count = 41;
  std::optional<Vec3> center;  // defaults to (0, 0, radius)
  BlendScheme scheme = BlendScheme::soft;

  void validate() const;
  Vec3 look_at_center() const { return center.value_or(Vec3(0.0, 0.0, radius)); }
};

OrbitSpec orbit_spec_from_json(const Json& j);
std::vector<Pose> orbit_poses(const OrbitSpec& spec);

}  // namespace mhi
