#pragma once

#include <span>
#include <vector>

#include "mhi/geometry.hpp"
#include "mhi/image.hpp"
#include "mhi/mhi.hpp"

namespace mhi {

/// Target view to render: its intrinsics (which also fix the output size) and
/// the target-to-reference pose.
struct RenderRequest {
  Intrinsics tgt_intrinsics;
  Pose rel_pose;
};

/// One MHI layer resampled into the target view.
struct WarpedLayer {
  RgbImage color;
  GrayImage alpha;
  Mask in_bounds;
};

/// Over-composite of all layers that share one normal.
struct MultiNormalImage {
  RgbImage color;  // Σ_j C_j · opacity_j
  GrayImage accumulated_alpha;  // Σ_j opacity_j
  int normal_index = 0;
  Mask valid_mask;  // some layer sampled inside the reference image
};

/// Backward-warps `layer` into the target view through the layer homography
/// with bilinear sampling. Samples outside the reference image (or whose
/// target ray never reaches the plane) give color 0, alpha 0, in_bounds false.
WarpedLayer warp_layer(const MhiLayer& layer, const RenderRequest& req, const Intrinsics& ref_cam);

/// Front-to-back over operator with j = 0 the nearest layer:
/// C = Σ_j C_j α_j Π_{k<j}(1 − α_k).
MultiNormalImage composite_normal_group(std::span<const WarpedLayer> layers, int normal_index = 0);

/// Warps and composites every normal group. Produces exactly (bitwise) the
/// same images as composite_normal_group over warp_layer, without
/// materializing the warped layers.
std::vector<MultiNormalImage> render_multi_normal_images(const Mhi& mhi, const RenderRequest& req);

/// Opacity bookkeeping for one pixel of a group, used by tests and tools.
struct PixelOpacities {
  std::vector<float> opacity;  // per layer, α_j Π_{k<j}(1−α_k)
  float transmittance = 1.0f;  // Π_j (1 − α_j)
};
PixelOpacities pixel_opacities(std::span<const WarpedLayer> layers, int x, int y);

}  // namespace mhi
